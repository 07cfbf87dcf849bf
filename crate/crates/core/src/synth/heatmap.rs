//! Cross-validation and test-error surfaces of the sparse ridge learner
//! over its (tau, gamma) grid, on one synthetic instance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{generate, SynthConfig};
use crate::cv::cv_evaluate;
use crate::data::{make_folds, LossFn};
use crate::error::{Error, Result};
use crate::learners::{log_uniform_grid, BuiltinFitter, Fitter, HyperParams, LearnerKind};

/// Which cross-validation scheme scores each cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CvKind {
    /// Leave-one-out: k equals the number of training samples.
    Loocv,
    /// Standard 5-fold.
    Fivefold,
}

impl CvKind {
    pub fn name(&self) -> &'static str {
        match self {
            CvKind::Loocv => "loocv",
            CvKind::Fivefold => "fivefold",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "loocv" => Ok(CvKind::Loocv),
            "fivefold" => Ok(CvKind::Fivefold),
            other => Err(Error::InvalidArgument(format!(
                "unknown cv kind '{other}' (expected loocv or fivefold)"
            ))),
        }
    }

    /// Number of folds on an n-sample training set.
    pub fn k(&self, n: usize) -> usize {
        match self {
            CvKind::Loocv => n,
            CvKind::Fivefold => 5,
        }
    }
}

impl std::fmt::Display for CvKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Which of the two surfaces to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatmapMatrix {
    Cv,
    Test,
}

impl HeatmapMatrix {
    pub fn name(&self) -> &'static str {
        match self {
            HeatmapMatrix::Cv => "cv",
            HeatmapMatrix::Test => "test",
        }
    }
}

/// CV-error and test-error surfaces over the (tau, gamma) grid.
/// `cv[ti][gi]` pairs `taus[ti]` with `gammas[gi]`; a failed fit leaves
/// NaN in the cell.
#[derive(Debug, Clone)]
pub struct HeatmapResult {
    pub kind: CvKind,
    pub taus: Vec<usize>,
    pub gammas: Vec<f64>,
    pub cv: Vec<Vec<f64>>,
    pub test: Vec<Vec<f64>>,
}

/// The tau axis used when none is supplied: every support size up to
/// min(n, p).
pub fn default_tau_grid(cfg: &SynthConfig) -> Vec<usize> {
    (1..=cfg.n.min(cfg.p)).collect()
}

/// The gamma axis used when none is supplied: 20 values log-uniform on
/// [1e-3, 1e3].
pub fn default_gamma_grid() -> Vec<f64> {
    log_uniform_grid(1e-3, 1e3, 20).expect("fixed grid parameters are valid")
}

/// Generate the instance for `cfg` and score every (tau, gamma) cell by
/// cross-validated error and by the test error of the model refit on the
/// whole training set. Cells whose fit fails are left as NaN rather than
/// aborting the surface.
pub fn heatmap_experiment(
    cfg: &SynthConfig,
    taus: &[usize],
    gammas: &[f64],
    kind: CvKind,
) -> Result<HeatmapResult> {
    if taus.is_empty() || gammas.is_empty() {
        return Err(Error::InvalidArgument("empty heatmap grid".into()));
    }
    for &tau in taus {
        if tau == 0 || tau > cfg.p {
            return Err(Error::InvalidArgument(format!(
                "tau = {tau} outside 1..=p (= {})",
                cfg.p
            )));
        }
    }
    for &gamma in gammas {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "gamma grid entries must be finite and positive, got {gamma}"
            )));
        }
    }
    let instance = generate(cfg)?;
    let folds = make_folds(cfg.n, kind.k(cfg.n), cfg.seed)?;
    let fitter = BuiltinFitter::new(LearnerKind::SparseRidge);
    let loss = LossFn::squared_error();
    let test_x = instance.test.features();
    let test_y = instance.test.response();

    let cells: Vec<(f64, f64)> = (0..taus.len() * gammas.len())
        .into_par_iter()
        .map(|cell| {
            let theta = HyperParams::SparseRidge {
                tau: taus[cell / gammas.len()],
                gamma: gammas[cell % gammas.len()],
            };
            let cv = cv_evaluate(&instance.train, &folds, &fitter, &theta, &loss, false)
                .map(|e| e.cv_error)
                .unwrap_or(f64::NAN);
            let test = fitter
                .fit(instance.train.features(), instance.train.response(), &theta)
                .and_then(|model| model.predict_all(test_x))
                .map(|pred| {
                    (0..test_y.len())
                        .map(|i| loss.loss(test_y[i], pred[i]))
                        .sum::<f64>()
                        / test_y.len() as f64
                })
                .unwrap_or(f64::NAN);
            (cv, test)
        })
        .collect();

    let mut cv = Vec::with_capacity(taus.len());
    let mut test = Vec::with_capacity(taus.len());
    for ti in 0..taus.len() {
        let row = &cells[ti * gammas.len()..(ti + 1) * gammas.len()];
        cv.push(row.iter().map(|c| c.0).collect());
        test.push(row.iter().map(|c| c.1).collect());
    }
    Ok(HeatmapResult {
        kind,
        taus: taus.to_vec(),
        gammas: gammas.to_vec(),
        cv,
        test,
    })
}

impl HeatmapResult {
    fn matrix(&self, which: HeatmapMatrix) -> &[Vec<f64>] {
        match which {
            HeatmapMatrix::Cv => &self.cv,
            HeatmapMatrix::Test => &self.test,
        }
    }

    /// The grid position (ti, gi) with the smallest finite value, ties to
    /// the smaller position; `None` when every cell is missing.
    pub fn argmin(&self, which: HeatmapMatrix) -> Option<(usize, usize)> {
        let m = self.matrix(which);
        let mut best: Option<((usize, usize), f64)> = None;
        for (ti, row) in m.iter().enumerate() {
            for (gi, &v) in row.iter().enumerate() {
                if v.is_finite() && best.is_none_or(|(_, b)| v < b) {
                    best = Some(((ti, gi), v));
                }
            }
        }
        best.map(|(pos, _)| pos)
    }

    /// `heatmap_{cv|test}_{loocv|fivefold}.csv`
    pub fn csv_filename(&self, which: HeatmapMatrix) -> String {
        format!("heatmap_{}_{}.csv", which.name(), self.kind)
    }

    /// `heatmap_{cv|test}_{loocv|fivefold}.svg`
    pub fn svg_filename(&self, which: HeatmapMatrix) -> String {
        format!("heatmap_{}_{}.svg", which.name(), self.kind)
    }

    /// CSV with a header row of gamma values and a leading tau column.
    pub fn to_csv(&self, which: HeatmapMatrix) -> String {
        let mut out = String::from("tau");
        for g in &self.gammas {
            out.push_str(&format!(",{g}"));
        }
        out.push('\n');
        for (ti, row) in self.matrix(which).iter().enumerate() {
            out.push_str(&format!("{}", self.taus[ti]));
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }

    /// Standalone SVG with a fixed blue-white-red ramp over the log-scaled
    /// finite cells; missing cells are gray.
    pub fn to_svg(&self, which: HeatmapMatrix) -> String {
        const CELL: usize = 14;
        const LEFT: usize = 46;
        const TOP: usize = 24;
        let m = self.matrix(which);
        let (rows, cols) = (self.taus.len(), self.gammas.len());
        let width = LEFT + cols * CELL + 8;
        let height = TOP + rows * CELL + 28;

        let finite: Vec<f64> = m
            .iter()
            .flatten()
            .copied()
            .filter(|v| v.is_finite())
            .collect();
        let (lo, hi) = finite.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        // Log scaling spreads surfaces that span orders of magnitude; the
        // offset keeps zero-valued cells in-domain.
        let scale = |v: f64| -> f64 {
            if !v.is_finite() || lo >= hi {
                return 0.5;
            }
            let (l, h, x) = ((lo + 1e-12).ln(), (hi + 1e-12).ln(), (v + 1e-12).ln());
            ((x - l) / (h - l)).clamp(0.0, 1.0)
        };
        let ramp = |t: f64| -> (u8, u8, u8) {
            let mix = |a: u8, b: u8, s: f64| (a as f64 + (b as f64 - a as f64) * s).round() as u8;
            let (lo_c, mid, hi_c) = ((59, 76, 192), (255, 255, 255), (180, 4, 38));
            if t < 0.5 {
                let s = t * 2.0;
                (mix(lo_c.0, mid.0, s), mix(lo_c.1, mid.1, s), mix(lo_c.2, mid.2, s))
            } else {
                let s = (t - 0.5) * 2.0;
                (mix(mid.0, hi_c.0, s), mix(mid.1, hi_c.1, s), mix(mid.2, hi_c.2, s))
            }
        };

        let mut svg = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
             font-family=\"monospace\" font-size=\"10\">\n"
        );
        svg.push_str(&format!(
            "<text x=\"{LEFT}\" y=\"14\">{} error ({})</text>\n",
            which.name(),
            self.kind
        ));
        for (ti, row) in m.iter().enumerate() {
            for (gi, &v) in row.iter().enumerate() {
                let (r, g, b) = if v.is_finite() {
                    ramp(scale(v))
                } else {
                    (204, 204, 204)
                };
                svg.push_str(&format!(
                    "<rect x=\"{}\" y=\"{}\" width=\"{CELL}\" height=\"{CELL}\" \
                     fill=\"rgb({r},{g},{b})\"/>\n",
                    LEFT + gi * CELL,
                    TOP + ti * CELL,
                ));
            }
        }
        svg.push_str(&format!(
            "<text x=\"4\" y=\"{}\">tau {}..{}</text>\n",
            TOP + 12,
            self.taus.first().expect("nonempty"),
            self.taus.last().expect("nonempty"),
        ));
        svg.push_str(&format!(
            "<text x=\"{LEFT}\" y=\"{}\">gamma {}..{}</text>\n",
            TOP + rows * CELL + 16,
            self.gammas.first().expect("nonempty"),
            self.gammas.last().expect("nonempty"),
        ));
        svg.push_str("</svg>\n");
        svg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> SynthConfig {
        SynthConfig {
            n: 20,
            p: 5,
            tau_true: 2,
            rho: 0.3,
            nu: 1.0,
            n_test: 60,
            seed: 11,
        }
    }

    #[test]
    fn degenerate_single_cell_grid_is_finite() {
        let cfg = small_cfg();
        let hm = heatmap_experiment(&cfg, &[2], &[1.0], CvKind::Fivefold).unwrap();
        assert_eq!(hm.cv.len(), 1);
        assert_eq!(hm.cv[0].len(), 1);
        assert!(hm.cv[0][0].is_finite());
        assert!(hm.test[0][0].is_finite());
        assert!(hm.cv[0][0] >= 0.0 && hm.test[0][0] >= 0.0);
    }

    #[test]
    fn surfaces_cover_the_grid_for_both_cv_kinds() {
        let cfg = small_cfg();
        let taus = [1usize, 2, 3];
        let gammas = [0.1, 1.0, 10.0];
        for kind in [CvKind::Fivefold, CvKind::Loocv] {
            let hm = heatmap_experiment(&cfg, &taus, &gammas, kind).unwrap();
            assert_eq!(hm.cv.len(), 3);
            assert!(hm.cv.iter().all(|r| r.len() == 3));
            assert!(hm
                .cv
                .iter()
                .chain(hm.test.iter())
                .flatten()
                .all(|v| v.is_finite()));
            assert!(hm.argmin(HeatmapMatrix::Cv).is_some());
        }
    }

    #[test]
    fn csv_layout_has_gamma_header_and_tau_column() {
        let cfg = small_cfg();
        let hm = heatmap_experiment(&cfg, &[1, 2], &[0.5, 2.0], CvKind::Fivefold).unwrap();
        let csv = hm.to_csv(HeatmapMatrix::Cv);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "tau,0.5,2");
        assert!(lines[1].starts_with("1,"));
        assert!(lines[2].starts_with("2,"));
        assert_eq!(lines[1].split(',').count(), 3);
        assert_eq!(hm.csv_filename(HeatmapMatrix::Cv), "heatmap_cv_fivefold.csv");
        assert_eq!(
            hm.csv_filename(HeatmapMatrix::Test),
            "heatmap_test_fivefold.csv"
        );
    }

    #[test]
    fn outputs_are_deterministic() {
        let cfg = small_cfg();
        let run = || heatmap_experiment(&cfg, &[1, 2, 3], &[0.1, 1.0], CvKind::Fivefold).unwrap();
        let (a, b) = (run(), run());
        assert_eq!(a.to_csv(HeatmapMatrix::Cv), b.to_csv(HeatmapMatrix::Cv));
        assert_eq!(a.to_csv(HeatmapMatrix::Test), b.to_csv(HeatmapMatrix::Test));
        assert_eq!(a.to_svg(HeatmapMatrix::Cv), b.to_svg(HeatmapMatrix::Cv));
    }

    #[test]
    fn svg_draws_one_rect_per_cell() {
        let cfg = small_cfg();
        let hm = heatmap_experiment(&cfg, &[1, 2], &[0.5, 2.0, 8.0], CvKind::Fivefold).unwrap();
        let svg = hm.to_svg(HeatmapMatrix::Test);
        assert!(svg.starts_with("<svg "));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<rect ").count(), 6);
        assert_eq!(hm.svg_filename(HeatmapMatrix::Test), "heatmap_test_fivefold.svg");
    }

    #[test]
    fn default_grids_match_their_contracts() {
        let cfg = small_cfg();
        let taus = default_tau_grid(&cfg);
        assert_eq!(taus, vec![1, 2, 3, 4, 5]);
        let gammas = default_gamma_grid();
        assert_eq!(gammas.len(), 20);
        assert_eq!(gammas[0], 1e-3);
        assert_eq!(gammas[19], 1e3);
    }

    #[test]
    fn rejects_malformed_grids() {
        let cfg = small_cfg();
        assert!(heatmap_experiment(&cfg, &[], &[1.0], CvKind::Fivefold).is_err());
        assert!(heatmap_experiment(&cfg, &[1], &[], CvKind::Fivefold).is_err());
        assert!(heatmap_experiment(&cfg, &[0], &[1.0], CvKind::Fivefold).is_err());
        assert!(heatmap_experiment(&cfg, &[6], &[1.0], CvKind::Fivefold).is_err());
        assert!(heatmap_experiment(&cfg, &[1], &[0.0], CvKind::Fivefold).is_err());
        assert!(CvKind::parse("sevenfold").is_err());
        assert_eq!(CvKind::parse("loocv").unwrap(), CvKind::Loocv);
    }
}
