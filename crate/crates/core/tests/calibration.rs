use heislim_core::group::{HeisPoint, HeisRect, Radii};
use heislim_core::limsup::{
    dimension_estimate, occupied_cells, occupied_cells_of_rects, sample_centers, HeisGrid, Window,
};
use heislim_core::svf::{dimension_threshold, PowerLawSeq};
use heislim_core::SeedStream;

const SCALES: [f64; 5] = [0.08, 0.04, 0.02, 0.01, 0.005];

fn slope_of(set: &[HeisRect], window: Option<&Window>) -> f64 {
    let counts: Vec<(f64, f64)> = SCALES
        .iter()
        .map(|&d| {
            let g = HeisGrid::new(d).unwrap();
            (d, occupied_cells_of_rects(set, &g, window) as f64)
        })
        .collect();
    dimension_estimate(&counts).unwrap().slope
}

#[test]
fn ambient_window_has_slope_four() {
    let w = Window::unit();
    let counts: Vec<(f64, f64)> = SCALES
        .iter()
        .map(|&d| (d, HeisGrid::new(d).unwrap().window_cell_count(&w) as f64))
        .collect();
    let slope = dimension_estimate(&counts).unwrap().slope;
    assert!((slope - 4.0).abs() <= 0.1, "{slope}");
}

#[test]
fn vertical_segment_has_slope_two() {
    // {0} × [0, 1] is the rectangle about (0, 0, 1/2) with r2² = 1/2.
    let seg = HeisRect::new(
        HeisPoint::new(0.0, 0.0, 0.5).unwrap(),
        Radii::new(1e-12, 0.5f64.sqrt()).unwrap(),
    );
    let slope = slope_of(&[seg], None);
    assert!((slope - 2.0).abs() <= 0.2, "{slope}");
}

#[test]
fn horizontal_disk_through_origin_has_slope_three() {
    // The plane z = 0 is horizontal only at the origin; away from it the
    // plane tilts against the grid and the disk needs δ^{-3} cells.
    let disk = HeisRect::new(HeisPoint::ORIGIN, Radii::new(1.0, 1e-9).unwrap());
    let slope = slope_of(&[disk], None);
    assert!((slope - 3.0).abs() <= 0.2, "{slope}");
}

#[test]
fn isotropic_generation_matches_threshold() {
    let seq = PowerLawSeq::new(0.5, 0.5).unwrap();
    let threshold = dimension_threshold(&seq).value;
    let w = Window::unit();
    let centers = sample_centers(&w, 200_000, SeedStream::new(0, 0));
    let counts: Vec<(f64, f64)> = [1_000usize, 10_000, 100_000]
        .iter()
        .map(|&n| {
            let d = (n as f64).powf(-0.5);
            let g = HeisGrid::new(d).unwrap();
            (
                d,
                occupied_cells(&centers, &seq, n, 2 * n, &g, &w).unwrap() as f64,
            )
        })
        .collect();
    let fit = dimension_estimate(&counts).unwrap();
    assert!((fit.slope - threshold).abs() <= 0.3, "{}", fit.slope);
}
