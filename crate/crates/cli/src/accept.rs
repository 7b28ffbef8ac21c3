//! The acceptance suite. Tolerances and budgets are fixed here and are not
//! configurable.

use std::f64::consts::LN_2;
use std::time::{Duration, Instant};

use heislim_core::covers::{
    annulus_cover, build_cover, segment_net, trivial_cover, verify_density, Cover,
};
use heislim_core::energy::{
    capacity_lower_bound, energy_bound_rect, riesz_energy, riesz_energy_ball, EnergyDomain,
    PairSampling,
};
use heislim_core::group::{in_horizontal_plane, HeisRect};
use heislim_core::limsup::{
    block_coefficients, dimension_estimate, occupied_cells, occupied_cells_of_rects,
    sample_centers, HeisGrid, Window,
};
use heislim_core::stats::fit_line;
use heislim_core::svf::{dimension_threshold, empirical_exponent, phi, PhiBranch, PowerLawSeq};
use heislim_core::{HeisPoint, Radii, SeedStream};
use rand::Rng;

pub struct Criterion {
    pub id: u8,
    pub title: &'static str,
    pub budget: Duration,
    run: fn(u64) -> Checks,
}

pub const CRITERIA: [Criterion; 9] = [
    Criterion {
        id: 1,
        title: "group and metric axioms",
        budget: Duration::from_secs(5),
        run: algebra,
    },
    Criterion {
        id: 2,
        title: "shape function consistency",
        budget: Duration::from_secs(1),
        run: shape_function,
    },
    Criterion {
        id: 3,
        title: "dimension threshold oracle",
        budget: Duration::from_secs(1),
        run: threshold,
    },
    Criterion {
        id: 4,
        title: "cover soundness and counts",
        budget: Duration::from_secs(120),
        run: cover_soundness,
    },
    Criterion {
        id: 5,
        title: "cover content tracks the shape function",
        budget: Duration::from_secs(60),
        run: content_tracking,
    },
    Criterion {
        id: 6,
        title: "energy scaling",
        budget: Duration::from_secs(300),
        run: energy_scaling,
    },
    Criterion {
        id: 7,
        title: "capacity and content sandwich",
        budget: Duration::from_secs(300),
        run: sandwich,
    },
    Criterion {
        id: 8,
        title: "box-counting calibration",
        budget: Duration::from_secs(300),
        run: calibration,
    },
    Criterion {
        id: 9,
        title: "block coefficient gadget",
        budget: Duration::from_secs(1),
        run: gadget,
    },
];

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub elapsed: Duration,
    pub budget: Duration,
    pub detail: String,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {} {}: {} [{:.2} s of {} s] {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs(),
            self.detail
        )
    }
}

/// Named sub-checks of one criterion.
#[derive(Default)]
struct Checks(Vec<(String, bool)>);

impl Checks {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        self.0.push((what.into(), ok));
    }

    fn passed(&self) -> bool {
        self.0.iter().all(|(_, ok)| *ok)
    }

    fn detail(&self) -> String {
        self.0
            .iter()
            .map(|(s, ok)| {
                if *ok {
                    s.clone()
                } else {
                    format!("FAILED {s}")
                }
            })
            .collect::<Vec<_>>()
            .join("; ")
    }
}

pub fn run_criterion(c: &Criterion, seed: u64) -> Outcome {
    let start = Instant::now();
    let checks = (c.run)(seed);
    let elapsed = start.elapsed();
    let mut detail = checks.detail();
    let in_budget = elapsed <= c.budget;
    if !in_budget {
        detail.push_str("; FAILED over runtime budget");
    }
    Outcome {
        id: c.id,
        title: c.title,
        passed: checks.passed() && in_budget,
        elapsed,
        budget: c.budget,
        detail,
    }
}

/// Runs the selected criteria (all when `only` is empty) in order, calling
/// `report` as each one finishes.
pub fn run_suite(seed: u64, only: &[u8], mut report: impl FnMut(&Outcome)) -> Vec<Outcome> {
    CRITERIA
        .iter()
        .filter(|c| only.is_empty() || only.contains(&c.id))
        .map(|c| {
            let o = run_criterion(c, seed);
            report(&o);
            o
        })
        .collect()
}

fn stream(criterion: u64, index: u64) -> u64 {
    (criterion << 32) | index
}

fn sweep() -> Vec<Radii> {
    (0..=6)
        .flat_map(|j| (0..=6).map(move |k| Radii::new(2f64.powi(-j), 2f64.powi(-k)).unwrap()))
        .collect()
}

fn slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    match fit_line(xs, ys) {
        Ok(f) => (f.slope, f.max_abs_residual()),
        Err(_) => (f64::NAN, f64::NAN),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn algebra(seed: u64) -> Checks {
    const CASES: usize = 100_000;
    const TOL: f64 = 1e-9;
    let mut rng = SeedStream::new(seed, stream(1, 0)).rng();
    let point = |rng: &mut heislim_core::rng::StreamRng| {
        HeisPoint::new(
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
            rng.random_range(-25.0..25.0),
        )
        .unwrap()
    };
    let scale = |ps: &[&HeisPoint]| {
        1.0 + ps
            .iter()
            .flat_map(|p| p.coords())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    };
    let diff = |a: &HeisPoint, b: &HeisPoint| {
        a.coords()
            .iter()
            .zip(b.coords())
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
    };
    let (
        mut assoc,
        mut ident,
        mut inverse,
        mut symm,
        mut tri,
        mut left,
        mut planar_lb,
        mut planar_eq,
    ) = (
        0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64,
    );
    let mut separation = 0usize;
    for _ in 0..CASES {
        let (p, q, r, g) = (
            point(&mut rng),
            point(&mut rng),
            point(&mut rng),
            point(&mut rng),
        );
        let pq = p.mul(&q);
        let lhs = pq.mul(&r);
        assoc = assoc.max(diff(&lhs, &p.mul(&q.mul(&r))) / scale(&[&p, &q, &r, &lhs]));
        ident = ident
            .max(diff(&p.mul(&HeisPoint::ORIGIN), &p).max(diff(&HeisPoint::ORIGIN.mul(&p), &p)));
        inverse = inverse.max(
            diff(&p.mul(&p.inv()), &HeisPoint::ORIGIN)
                .max(diff(&p.inv().mul(&p), &HeisPoint::ORIGIN))
                / scale(&[&p]),
        );

        let d = p.dist(&q);
        symm = symm.max(rel(d, q.dist(&p)));
        if p.dist(&p) != 0.0 || d <= 0.0 {
            separation += 1;
        }
        tri = tri.max((d - p.dist(&r) - r.dist(&q)) / d);
        left = left.max(rel(g.mul(&p).dist(&g.mul(&q)), d));
        planar_lb = planar_lb.max((p.planar_dist(&q) - d) / d);

        let h = HeisPoint::new(
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            0.0,
        )
        .unwrap();
        let ph = p.mul(&h);
        let e = if in_horizontal_plane(&p, &ph) {
            rel(p.dist(&ph), p.planar_dist(&ph))
        } else {
            f64::INFINITY
        };
        planar_eq = planar_eq.max(e);
    }
    let mut c = Checks::default();
    c.check(assoc <= TOL, format!("associativity {assoc:.1e}"));
    c.check(
        ident <= TOL && inverse <= TOL,
        format!("identity {ident:.1e} inverse {inverse:.1e}"),
    );
    c.check(
        symm <= TOL && separation == 0,
        format!("symmetry {symm:.1e} separation failures {separation}"),
    );
    c.check(tri <= TOL, format!("triangle excess {tri:.1e}"));
    c.check(left <= TOL, format!("left invariance {left:.1e}"));
    c.check(
        planar_lb <= TOL,
        format!("planar lower bound excess {planar_lb:.1e}"),
    );
    c.check(
        planar_eq <= TOL,
        format!("planar equality on H(p) {planar_eq:.1e}"),
    );
    c.check(true, format!("{CASES} cases"));
    c
}

fn shape_function(_seed: u64) -> Checks {
    let radii: Vec<f64> = (-12..=4).map(|e| 2f64.powf(e as f64 / 2.0)).collect();
    let ts: Vec<f64> = (0..=400).map(|i| i as f64 / 100.0).collect();
    let mut diag = 0.0f64;
    for &s in &radii {
        for &t in &ts {
            let thin = PhiBranch::select(true, t).eval(t, s, s);
            let flat = PhiBranch::select(false, t).eval(t, s, s);
            let v = phi(t, &Radii::new(s, s).unwrap()).unwrap().value;
            diag = diag.max(rel(thin, flat)).max(rel(v, thin));
        }
    }
    let mut jump = 0.0f64;
    let mut at_four = 0.0f64;
    for &a in &radii {
        for &b in &radii {
            let r = Radii::new(a, b).unwrap();
            for t0 in [2.0, 3.0] {
                let below = phi(t0 - 1e-9, &r).unwrap().value;
                let above = phi(t0 + 1e-9, &r).unwrap().value;
                jump = jump.max(rel(below, above));
            }
            let expected = a * a * b * b;
            at_four = at_four.max(rel(phi(4.0, &r).unwrap().value, expected));
            for br in [PhiBranch::Thin24, PhiBranch::Flat34] {
                at_four = at_four.max(rel(br.eval(4.0, a, b), expected));
            }
        }
    }
    let mut c = Checks::default();
    c.check(
        diag <= 1e-12,
        format!("branch agreement on r1 = r2 {diag:.1e}"),
    );
    c.check(jump <= 1e-6, format!("continuity at t = 2, 3 {jump:.1e}"));
    c.check(at_four <= 1e-12, format!("Φ^4 = r1² r2² {at_four:.1e}"));
    c
}

fn threshold(_seed: u64) -> Checks {
    let mut c = Checks::default();
    let iso = dimension_threshold(&PowerLawSeq::new(0.5, 0.5).unwrap());
    c.check(
        iso.value == 2.0 && iso.exact.map(|q| q == 2.into()).unwrap_or(false),
        format!("(1/2, 1/2) -> {}", iso.value),
    );
    let seq = PowerLawSeq::new(0.25, 1.0).unwrap();
    let an = dimension_threshold(&seq);
    let exact = an
        .exact
        .map(|q| q.to_string())
        .unwrap_or_else(|| "none".into());
    c.check(
        (an.value - 22.0 / 7.0).abs() <= 1e-6,
        format!("(1/4, 1) -> {} = {exact}", an.value),
    );
    let brute = empirical_exponent(an.value, &seq, 1_000_000).unwrap_or(f64::NAN);
    c.check(
        (brute - 1.0).abs() <= 1e-3,
        format!("series exponent at n = 1e6 is {brute:.6}"),
    );
    let capped = dimension_threshold(&PowerLawSeq::new(0.125, 0.125).unwrap());
    c.check(
        capped.capped && capped.value == 4.0,
        format!("(1/8, 1/8) -> {} capped {}", capped.value, capped.capped),
    );
    c
}

fn cover_soundness(seed: u64) -> Checks {
    const SAMPLES: u64 = 10_000;
    let mut covers: Vec<Cover> = Vec::new();
    for r in sweep() {
        covers.push(trivial_cover(&r));
        if r.r1() <= r.r2() {
            covers.push(segment_net(&r).unwrap());
        }
        if r.r1() >= r.r2() {
            covers.push(annulus_cover(&r).unwrap());
        }
    }
    let mut bad = 0u64;
    let mut worst = String::new();
    for (i, cover) in covers.iter().enumerate() {
        let rep =
            verify_density(cover, SAMPLES, SeedStream::new(seed, stream(4, i as u64))).unwrap();
        if rep.violations + rep.uncovered > 0 {
            bad += rep.violations + rep.uncovered;
            worst = format!(
                " e.g. {:?} {}",
                cover.target().radii,
                cover.construction().name()
            );
        }
    }
    // Six octaves of aspect ratio, 4 to 256, past the range where the
    // additive constants in the counts still dominate.
    let octaves = 2..=8;
    let js: Vec<f64> = octaves.clone().map(|j| j as f64 * LN_2).collect();
    let seg: Vec<f64> = octaves
        .clone()
        .map(|j| {
            (segment_net(&Radii::new(2f64.powi(-j), 1.0).unwrap())
                .unwrap()
                .element_count() as f64)
                .ln()
        })
        .collect();
    let ann: Vec<f64> = octaves
        .map(|k| {
            (annulus_cover(&Radii::new(1.0, 2f64.powi(-k)).unwrap())
                .unwrap()
                .element_count() as f64)
                .ln()
        })
        .collect();
    let (s_seg, _) = slope(&js, &seg);
    let (s_ann, _) = slope(&js, &ann);
    let mut c = Checks::default();
    c.check(
        bad == 0,
        format!(
            "{} covers x {SAMPLES} samples, {bad} violations{worst}",
            covers.len()
        ),
    );
    c.check(
        (s_seg - 2.0).abs() <= 0.05,
        format!("segment net count slope {s_seg:.4}"),
    );
    c.check(
        (s_ann - 6.0).abs() <= 0.1,
        format!("annulus count slope {s_ann:.4}"),
    );
    c
}

fn content_tracking(_seed: u64) -> Checks {
    let mut c = Checks::default();
    for t in [0.5, 1.5, 2.5, 3.5] {
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for r in sweep() {
            xs.push(phi(t, &r).unwrap().value.ln());
            ys.push(build_cover(&r, t).unwrap().content(t).ln());
        }
        let (s, resid) = slope(&xs, &ys);
        c.check(
            (s - 1.0).abs() <= 0.05 && resid <= 50f64.ln(),
            format!("t = {t}: slope {s:.4}, max residual {resid:.3}"),
        );
    }
    c
}

fn energy_scaling(seed: u64) -> Checks {
    const PAIRS: u64 = 100_000;
    let mut c = Checks::default();
    let mut idx = 0u64;
    let mut next = || {
        idx += 1;
        SeedStream::new(seed, stream(6, idx))
    };
    let rhos = [0.25, 1.0, 4.0];
    let lr: Vec<f64> = rhos.iter().map(|r: &f64| r.ln()).collect();
    for t in [0.5, 2.5, 3.5] {
        let ys: Vec<f64> = rhos
            .iter()
            .map(|&rho| {
                riesz_energy_ball(rho, t, PAIRS, next())
                    .map(|e| e.value.ln())
                    .unwrap_or(f64::NAN)
            })
            .collect();
        let (s, _) = slope(&lr, &ys);
        c.check(
            (s - (8.0 - t)).abs() <= 0.1,
            format!("ball t = {t}: slope {s:.4}"),
        );
    }
    // One representative exponent per case of the closed-form bound.
    let cases: [(&str, f64, bool); 4] = [
        ("thin, t < 2", 0.5, true),
        ("thin, t > 2", 3.5, true),
        ("flat, t < 3", 0.5, false),
        ("flat, t > 3", 3.5, false),
    ];
    for (name, t, thin) in cases {
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for j in 2..=6 {
            let small = 2f64.powi(-j);
            let r = if thin {
                Radii::new(small, 1.0)
            } else {
                Radii::new(1.0, small)
            }
            .unwrap();
            let e = riesz_energy(
                &EnergyDomain::Rect(r),
                t,
                PAIRS,
                PairSampling::default(),
                next(),
            )
            .unwrap();
            let bound = energy_bound_rect(t, &r).unwrap().bound;
            xs.push(j as f64 * LN_2);
            ys.push((e.value / bound).ln());
        }
        let (s, _) = slope(&xs, &ys);
        c.check(
            s.abs() <= 0.1,
            format!("{name} (t = {t}): energy/bound slope {s:.4}"),
        );
    }
    c
}

fn sandwich(seed: u64) -> Checks {
    const PAIRS: u64 = 100_000;
    let mut c = Checks::default();
    let mut idx = 0u64;
    for t in [0.5, 1.5, 2.5, 3.5] {
        let (mut lp, mut cap_ratio, mut content_ratio) = (Vec::new(), Vec::new(), Vec::new());
        let mut worst = 0.0f64;
        for r in sweep() {
            idx += 1;
            let e = riesz_energy(
                &EnergyDomain::Rect(r),
                t,
                PAIRS,
                PairSampling::default(),
                SeedStream::new(seed, stream(7, idx)),
            )
            .unwrap();
            let cap = capacity_lower_bound(&r, &e).unwrap();
            let content = build_cover(&r, t).unwrap().content(t);
            let p = phi(t, &r).unwrap().value;
            worst = worst.max(cap / content);
            lp.push(p.ln());
            cap_ratio.push((cap / p).ln());
            content_ratio.push((content / p).ln());
        }
        let (sc, _) = slope(&lp, &cap_ratio);
        let (sh, _) = slope(&lp, &content_ratio);
        c.check(worst <= 1.1, format!("t = {t}: max cap/content {worst:.3}"));
        c.check(sc.abs() <= 0.1, format!("t = {t}: cap/Φ slope {sc:.4}"));
        c.check(sh.abs() <= 0.1, format!("t = {t}: content/Φ slope {sh:.4}"));
    }
    c
}

fn calibration(seed: u64) -> Checks {
    const SCALES: [f64; 5] = [0.08, 0.04, 0.02, 0.01, 0.005];
    let mut c = Checks::default();
    let w = Window::unit();
    let fit = |counts: &[(f64, f64)]| {
        dimension_estimate(counts)
            .map(|f| f.slope)
            .unwrap_or(f64::NAN)
    };
    let ambient: Vec<(f64, f64)> = SCALES
        .iter()
        .map(|&d| (d, HeisGrid::new(d).unwrap().window_cell_count(&w) as f64))
        .collect();
    let s = fit(&ambient);
    c.check((s - 4.0).abs() <= 0.1, format!("ambient slope {s:.4}"));

    // {0} × [0, 1] as a degenerate rectangle about (0, 0, 1/2).
    let segment = HeisRect::new(
        HeisPoint::new(0.0, 0.0, 0.5).unwrap(),
        Radii::new(1e-12, 0.5f64.sqrt()).unwrap(),
    );
    let vertical: Vec<(f64, f64)> = SCALES
        .iter()
        .map(|&d| {
            (
                d,
                occupied_cells_of_rects(&[segment], &HeisGrid::new(d).unwrap(), None) as f64,
            )
        })
        .collect();
    let s = fit(&vertical);
    c.check(
        (s - 2.0).abs() <= 0.2,
        format!("vertical segment slope {s:.4}"),
    );

    let seq = PowerLawSeq::new(0.5, 0.5).unwrap();
    let target = dimension_threshold(&seq).value;
    let ns = [1_000usize, 10_000, 100_000];
    let centers = sample_centers(&w, 2 * ns[2], SeedStream::new(seed, stream(8, 0)));
    let generation: Vec<(f64, f64)> = ns
        .iter()
        .map(|&n| {
            let d = seq.radii(n as u64).max();
            let grid = HeisGrid::new(d).unwrap();
            (
                d,
                occupied_cells(&centers, &seq, n, 2 * n, &grid, &w).unwrap() as f64,
            )
        })
        .collect();
    let s = fit(&generation);
    c.check(
        (s - target).abs() <= 0.3,
        format!("isotropic generation slope {s:.4} vs threshold {target}"),
    );
    c
}

type Weight = fn(u64) -> f64;

fn gadget(_seed: u64) -> Checks {
    const BLOCKS: usize = 20;
    let mut c = Checks::default();
    let weights: [(&str, Weight, u64); 2] = [
        ("b = 1", |_| 1.0, 1 << 22),
        ("b = 1 + log k", |k| 1.0 + (k as f64).ln(), 1 << 26),
    ];
    for (name, b, horizon) in weights {
        let table = match block_coefficients(b, horizon, BLOCKS) {
            Ok(t) => t,
            Err(e) => {
                c.check(false, format!("{name}: {e}"));
                continue;
            }
        };
        let row_err = table
            .blocks
            .iter()
            .map(|b| (b.row_sum - 1.0).abs())
            .fold(0.0, f64::max);
        let decreasing = table
            .blocks
            .windows(2)
            .all(|w| w[1].sum_sq_b < w[0].sum_sq_b);
        let dyadic = table.blocks.iter().all(|b| {
            b.sum_sq_b <= 2f64.powi(-(b.n as i32)) * (1.0 + 1e-12)
                && (b.sum_sq_b - b.a_n).abs() <= 1e-12 * b.a_n
        });
        let moving = table.blocks.windows(2).all(|w| w[1].start == w[0].end + 1);
        c.check(
            row_err <= 1e-12,
            format!("{name}: row sum error {row_err:.1e}"),
        );
        c.check(
            decreasing && dyadic,
            format!("{name}: Σ a² b = a_n <= 2^-n, decreasing"),
        );
        c.check(
            moving,
            format!(
                "{name}: supports consecutive up to k = {}",
                table.blocks[BLOCKS - 1].end
            ),
        );
    }
    c
}
