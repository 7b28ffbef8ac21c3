use heislim_core::covers::{build_cover, verify_density};
use heislim_core::energy::{
    capacity_lower_bound, energy_bound_rect, riesz_energy, EnergyDomain, PairSampling,
};
use heislim_core::limsup::{
    block_coefficients, dimension_estimate, occupied_cells, sample_centers, BlockCoefficients,
    HeisGrid, Window,
};
use heislim_core::svf::{dimension_threshold, phi, PowerLawSeq};
use heislim_core::{Radii, SeedStream};

use crate::args::{
    CoeffsArgs, CoverArgs, DeltaRule, EnergyArgs, PhiArgs, Sampling, SimulateArgs, ThresholdArgs,
    Weights,
};
use crate::config::Invocation;
use crate::error::Result;
use crate::output::{num, CsvSink};

pub fn phi_table(args: &PhiArgs, inv: &Invocation, out: &mut CsvSink) -> Result<()> {
    out.preamble(inv, &["t", "r1", "r2", "branch", "phi"])?;
    for &t in &args.t {
        for (r1, r2) in args.radii.pairs() {
            let v = phi(t, &Radii::new(r1, r2)?)?;
            out.row(&[
                num(t),
                num(r1),
                num(r2),
                v.branch.name().into(),
                num(v.value),
            ])?;
        }
    }
    Ok(())
}

pub fn threshold_table(args: &ThresholdArgs, inv: &Invocation, out: &mut CsvSink) -> Result<()> {
    out.preamble(inv, &["alpha", "beta", "threshold", "exact", "capped"])?;
    for &alpha in &args.alpha {
        for &beta in &args.beta {
            let th = dimension_threshold(&PowerLawSeq::new(alpha, beta)?);
            let exact = th.exact.map(|q| q.to_string()).unwrap_or_default();
            out.row(&[
                num(alpha),
                num(beta),
                num(th.value),
                exact,
                th.capped.to_string(),
            ])?;
        }
    }
    Ok(())
}

pub fn cover_table(args: &CoverArgs, inv: &Invocation, out: &mut CsvSink) -> Result<()> {
    out.preamble(
        inv,
        &[
            "r1",
            "r2",
            "t",
            "construction",
            "element_count",
            "density_claim",
            "max_gap",
            "violations",
            "content",
            "phi",
            "content_over_phi",
        ],
    )?;
    let mut index = 0;
    for &t in &args.t {
        for (r1, r2) in args.radii.pairs() {
            let r = Radii::new(r1, r2)?;
            let cover = build_cover(&r, t)?;
            let report = verify_density(&cover, args.samples, SeedStream::new(args.seed, index))?;
            index += 1;
            let content = cover.content(t);
            let p = phi(t, &r)?.value;
            out.row(&[
                num(r1),
                num(r2),
                num(t),
                cover.construction().name().into(),
                cover.element_count().to_string(),
                num(cover.density_claim()),
                num(report.max_gap),
                (report.violations + report.uncovered).to_string(),
                num(content),
                num(p),
                num(content / p),
            ])?;
        }
    }
    Ok(())
}

pub fn energy_table(args: &EnergyArgs, inv: &Invocation, out: &mut CsvSink) -> Result<()> {
    out.preamble(
        inv,
        &[
            "r1",
            "r2",
            "t",
            "n_pairs",
            "seed",
            "energy",
            "stderr",
            "bound",
            "energy_over_bound",
            "cap_lower",
            "phi",
            "cap_over_phi",
        ],
    )?;
    let sampling = match args.sampling {
        Sampling::Uniform => PairSampling::Uniform,
        Sampling::Mixture => PairSampling::KernelMixture {
            uniform_weight: args.uniform_weight,
        },
    };
    let mut index = 0;
    for &t in &args.t {
        for (r1, r2) in args.radii.pairs() {
            let r = Radii::new(r1, r2)?;
            let e = riesz_energy(
                &EnergyDomain::Rect(r),
                t,
                args.pairs,
                sampling,
                SeedStream::new(args.seed, index),
            )?;
            index += 1;
            // The closed form has logarithmic corrections at integer t.
            let bound = energy_bound_rect(t, &r)
                .map(|b| b.bound)
                .unwrap_or(f64::NAN);
            let cap = capacity_lower_bound(&r, &e)?;
            let p = phi(t, &r)?.value;
            out.row(&[
                num(r1),
                num(r2),
                num(t),
                e.n_pairs.to_string(),
                args.seed.to_string(),
                num(e.value),
                num(e.stderr),
                num(bound),
                num(e.value / bound),
                num(cap),
                num(p),
                num(cap / p),
            ])?;
        }
    }
    Ok(())
}

pub fn simulate_table(args: &SimulateArgs, inv: &Invocation, out: &mut CsvSink) -> Result<()> {
    let w = &args.window;
    let window = Window::new([w[0], w[1], w[2]], [w[3], w[4], w[5]])?;
    let seq = PowerLawSeq::new(args.alpha, args.beta)?;
    let largest = args.n.iter().copied().max().unwrap_or(0);
    let centers = sample_centers(&window, 2 * largest, SeedStream::new(args.seed, 0));
    out.preamble(
        inv,
        &["N", "delta", "occupied", "log_inv_delta", "log_occupied"],
    )?;
    let mut counts = Vec::new();
    for &n in &args.n {
        let delta = match args.delta_rule {
            DeltaRule::Radius => seq.radii(n as u64).max(),
            DeltaRule::Power => (n as f64).powf(-args.delta_exponent),
        };
        let grid = HeisGrid::new(delta)?;
        let occupied = occupied_cells(&centers, &seq, n, 2 * n, &grid, &window)?;
        counts.push((delta, occupied as f64));
        out.row(&[
            n.to_string(),
            num(delta),
            occupied.to_string(),
            num(-delta.ln()),
            num((occupied as f64).ln()),
        ])?;
    }
    match dimension_estimate(&counts) {
        Ok(fit) => out.row(&[
            "summary".into(),
            "slope".into(),
            num(fit.slope),
            "r_squared".into(),
            num(fit.r_squared),
        ]),
        Err(e) => out.comment(&format!("no slope: {e}")),
    }
}

fn weight(w: Weights) -> fn(u64) -> f64 {
    match w {
        Weights::One => |_| 1.0,
        Weights::Log => |k| 1.0 + (k as f64).ln(),
    }
}

pub fn coefficients(args: &CoeffsArgs) -> Result<BlockCoefficients> {
    Ok(block_coefficients(
        weight(args.weights),
        args.horizon,
        args.blocks,
    )?)
}

pub fn coeffs_table(args: &CoeffsArgs, inv: &Invocation, out: &mut CsvSink) -> Result<()> {
    let table = coefficients(args)?;
    if args.summary {
        out.preamble(
            inv,
            &["n", "start", "end", "a_n", "row_sum", "sum_sq", "sum_sq_b"],
        )?;
        for b in &table.blocks {
            out.row(&[
                b.n.to_string(),
                b.start.to_string(),
                b.end.to_string(),
                num(b.a_n),
                num(b.row_sum),
                num(b.sum_sq),
                num(b.sum_sq_b),
            ])?;
        }
    } else {
        out.preamble(inv, &["n", "k", "b", "a"])?;
        let b = weight(args.weights);
        for blk in &table.blocks {
            for (k, a) in table.row(blk.n, b) {
                out.row(&[blk.n.to_string(), k.to_string(), num(b(k)), num(a)])?;
            }
        }
    }
    Ok(())
}
