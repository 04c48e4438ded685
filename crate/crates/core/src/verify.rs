//! Cross-checks the closed form against exhaustive search, and runs the
//! structural property suite over fixed small moduli.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{least_non_residue, qr_mod_p, ExtOrder, Limits, PrimePowerModulus};
use crate::error::{Error, Result};
use crate::formulas::{self, Fault};
use crate::polyspace::{constant_term_dominates, is_square_poly, square_root_bounded, QuadPoly, DEFAULT_ORACLE_BUDGET};
use crate::record::OutputRecord;
use crate::search::{self, buchi_length, ml_f1, ml_opt, square_run_within, F2Selection, Length, SearchTables, SweepOptions};

const MAX_LISTED_FAILURES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridPoint {
    pub p: u64,
    pub s: u32,
    pub mode: F2Selection,
}

/// Property checks run by [`verify_lemmas`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaSuite {
    /// Infinite length agrees with a ten-period direct evaluation (m = 9).
    Periodicity,
    /// Square-polynomial decision vs. bounded root enumeration (m = 9, 27).
    SquarePolyOracle,
    /// Dominant non-square constant term forces length 0 (m = 9, 27, 25).
    NonsquareConstant,
    /// Odd `min(ord f1, ord f2)` bounds `ml <= 2` (m = 27, 25).
    OddOrderBound,
    /// `f2 = 0` and odd `ord f1` bound `ml <= 1` (m = 27, 25, 125).
    LinearOddOrderBound,
    /// Explicit witnesses of length >= 1 (`f2 = 0`) and >= 2 (`ord f2 > 0`)
    /// at every grid point.
    LowerBounds,
    /// `ml(c^2 f2) = ml(f2)` for units `c` (m = 9, 25).
    UnitSquareScaling,
    /// Unit `f1`, non-unit `f2`: `opt(p^s, f2, f1) = opt(p, 0, f1)`.
    LinearReduction,
    /// Even `t2 <= t1`: dividing out `p^t2` preserves `opt`.
    LeadingOrderReduction,
    /// Unit square `f2` mod `p`: `ml(p, f2) < p`.
    HensleyBound,
    /// Every non-residue gives the same `opt` at modulus `p`.
    NonresidueIndependence,
    /// `opt(p, 0) <= (p + 3) / 2`.
    LinearConstantBound,
}

impl LemmaSuite {
    pub const ALL: [LemmaSuite; 12] = [
        LemmaSuite::Periodicity,
        LemmaSuite::SquarePolyOracle,
        LemmaSuite::NonsquareConstant,
        LemmaSuite::OddOrderBound,
        LemmaSuite::LinearOddOrderBound,
        LemmaSuite::LowerBounds,
        LemmaSuite::UnitSquareScaling,
        LemmaSuite::LinearReduction,
        LemmaSuite::LeadingOrderReduction,
        LemmaSuite::HensleyBound,
        LemmaSuite::NonresidueIndependence,
        LemmaSuite::LinearConstantBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LemmaSuite::Periodicity => "periodicity",
            LemmaSuite::SquarePolyOracle => "square_poly_oracle",
            LemmaSuite::NonsquareConstant => "nonsquare_constant",
            LemmaSuite::OddOrderBound => "odd_order_bound",
            LemmaSuite::LinearOddOrderBound => "linear_odd_order_bound",
            LemmaSuite::LowerBounds => "lower_bounds",
            LemmaSuite::UnitSquareScaling => "unit_square_scaling",
            LemmaSuite::LinearReduction => "linear_reduction",
            LemmaSuite::LeadingOrderReduction => "leading_order_reduction",
            LemmaSuite::HensleyBound => "hensley_bound",
            LemmaSuite::NonresidueIndependence => "nonresidue_independence",
            LemmaSuite::LinearConstantBound => "linear_constant_bound",
        }
    }
}

/// What to verify and how.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub points: Vec<GridPoint>,
    pub lemmas: Vec<LemmaSuite>,
    /// Worker threads; `None` uses the global rayon pool.
    pub jobs: Option<usize>,
    pub limits: Limits,
    /// Samples drawn mod 27 for the square-polynomial oracle.
    pub oracle_samples: usize,
    pub seed: u64,
    #[doc(hidden)]
    pub fault: Option<Fault>,
}

impl GridSpec {
    pub fn new(points: Vec<GridPoint>) -> Self {
        GridSpec {
            points,
            lemmas: LemmaSuite::ALL.to_vec(),
            jobs: None,
            limits: Limits::default(),
            oracle_samples: 2000,
            seed: 0x5eed_b0c1,
            fault: None,
        }
    }

    /// Every `f2` up to modulus 125, representatives at 243 and 625.
    pub fn default_grid() -> Self {
        let pairs = [
            (3, 1),
            (3, 2),
            (3, 3),
            (3, 4),
            (3, 5),
            (5, 1),
            (5, 2),
            (5, 3),
            (5, 4),
            (7, 1),
            (7, 2),
            (11, 1),
            (13, 1),
        ];
        let points = pairs
            .into_iter()
            .map(|(p, s): (u64, u32)| GridPoint {
                p,
                s,
                mode: if p.pow(s) <= 125 {
                    F2Selection::All
                } else {
                    F2Selection::Representatives
                },
            })
            .collect();
        GridSpec::new(points)
    }

    /// Parses a JSON list of `{"p": .., "s": .., "mode": "all" | "representatives"}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let points: Vec<GridPoint> =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("grid file: {e}")))?;
        for pt in &points {
            PrimePowerModulus::with_cap(pt.p, pt.s, u64::MAX)?;
        }
        Ok(GridSpec::new(points))
    }

    fn install<T: Send>(&self, op: impl FnOnce() -> T + Send) -> T {
        match self.jobs {
            Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
                Ok(pool) => pool.install(op),
                Err(_) => op(),
            },
            None => op(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "SKIPPED")]
    Skipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIPPED",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointReport {
    pub p: u64,
    pub s: u32,
    pub modulus: u64,
    pub mode: F2Selection,
    pub status: Status,
    pub skip_reason: Option<String>,
    pub comparisons: usize,
    /// Records where formula and search disagree.
    pub mismatches: Vec<OutputRecord>,
    /// `f2` values whose brute-force `opt` is infinite.
    pub infinite_f2: Vec<u64>,
    /// `f2` values predicted infinite by the closed form's characterization.
    pub predicted_infinite_f2: Vec<u64>,
    pub elapsed_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub name: String,
    pub status: Status,
    pub checked: u64,
    pub failed: u64,
    /// First few failures, human-readable.
    pub failures: Vec<String>,
    pub elapsed_ms: Option<u64>,
}

impl LemmaReport {
    fn new(name: &str) -> Self {
        LemmaReport {
            name: name.to_string(),
            status: Status::Pass,
            checked: 0,
            failed: 0,
            failures: Vec::new(),
            elapsed_ms: None,
        }
    }

    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failed += 1;
            self.status = Status::Fail;
            if self.failures.len() < MAX_LISTED_FAILURES {
                self.failures.push(detail());
            }
        }
    }

    fn error(&mut self, e: Error) {
        self.failed += 1;
        self.status = Status::Fail;
        if self.failures.len() < MAX_LISTED_FAILURES {
            self.failures.push(format!("error: {e}"));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub status: Status,
    pub points: Vec<PointReport>,
    pub lemmas: Vec<LemmaReport>,
    pub elapsed_ms: Option<u64>,
}

impl VerifyReport {
    fn assemble(points: Vec<PointReport>, lemmas: Vec<LemmaReport>, elapsed_ms: Option<u64>) -> Self {
        let failed = points.iter().any(|p| p.status == Status::Fail) || lemmas.iter().any(|l| l.status == Status::Fail);
        VerifyReport {
            status: if failed { Status::Fail } else { Status::Pass },
            points,
            lemmas,
            elapsed_ms,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn mismatch_count(&self) -> usize {
        self.points.iter().map(|p| p.mismatches.len()).sum()
    }

    pub fn comparison_count(&self) -> usize {
        self.points.iter().map(|p| p.comparisons).sum()
    }

    pub fn lemma(&self, name: &str) -> Option<&LemmaReport> {
        self.lemmas.iter().find(|l| l.name == name)
    }

    /// Copy with every wall-clock field cleared, for reproducibility checks.
    pub fn without_timings(&self) -> VerifyReport {
        let mut r = self.clone();
        r.elapsed_ms = None;
        r.points.iter_mut().for_each(|p| p.elapsed_ms = None);
        r.lemmas.iter_mut().for_each(|l| l.elapsed_ms = None);
        r
    }

    /// Plain-text table of points and lemma suites.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<8} {:<16} {:>7} {:>11} {:>10}  status",
            "modulus", "mode", "f2", "mismatches", "ms"
        );
        for p in &self.points {
            let _ = writeln!(
                out,
                "{:<8} {:<16} {:>7} {:>11} {:>10}  {}",
                format!("{}^{}", p.p, p.s),
                p.mode.as_str(),
                p.comparisons,
                p.mismatches.len(),
                p.elapsed_ms.map(|t| t.to_string()).unwrap_or_default(),
                p.status.as_str()
            );
            if let Some(reason) = &p.skip_reason {
                let _ = writeln!(out, "    skipped: {reason}");
            }
            for m in &p.mismatches {
                let _ = writeln!(
                    out,
                    "    f2={} t2={} {}: formula={} brute={}",
                    m.f2,
                    m.t2,
                    m.g2_character,
                    m.opt_formula.map(|v| v.to_string()).unwrap_or_default(),
                    m.opt_brute.map(|v| v.to_string()).unwrap_or_default()
                );
            }
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "{:<26} {:>9} {:>7}  status", "lemma suite", "checked", "failed");
        for l in &self.lemmas {
            let _ = writeln!(out, "{:<26} {:>9} {:>7}  {}", l.name, l.checked, l.failed, l.status.as_str());
            for f in &l.failures {
                let _ = writeln!(out, "    {f}");
            }
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "overall: {} ({} comparisons, {} mismatches)",
            self.status.as_str(),
            self.comparison_count(),
            self.mismatch_count()
        );
        out
    }
}

fn ms(start: Instant) -> Option<u64> {
    Some(start.elapsed().as_millis() as u64)
}

/// Formula vs. exhaustive search at every grid point, plus the check that
/// search finds infinite `opt` exactly where the closed form predicts it.
pub fn verify_main(grid: &GridSpec) -> VerifyReport {
    let start = Instant::now();
    let points = grid.install(|| {
        grid.points
            .par_iter()
            .map(|pt| verify_point(grid, *pt))
            .collect::<Vec<_>>()
    });
    let mut characterization = LemmaReport::new("infinite_characterization");
    for pt in points.iter().filter(|p| p.status != Status::Skipped) {
        characterization.check(pt.infinite_f2 == pt.predicted_infinite_f2, || {
            format!(
                "{}^{}: search infinite at {:?}, predicted {:?}",
                pt.p, pt.s, pt.infinite_f2, pt.predicted_infinite_f2
            )
        });
    }
    VerifyReport::assemble(points, vec![characterization], ms(start))
}

fn verify_point(grid: &GridSpec, pt: GridPoint) -> PointReport {
    let start = Instant::now();
    let mut report = PointReport {
        p: pt.p,
        s: pt.s,
        modulus: pt.p.saturating_pow(pt.s),
        mode: pt.mode,
        status: Status::Pass,
        skip_reason: None,
        comparisons: 0,
        mismatches: Vec::new(),
        infinite_f2: Vec::new(),
        predicted_infinite_f2: Vec::new(),
        elapsed_ms: None,
    };
    let prepared = PrimePowerModulus::with_cap(pt.p, pt.s, grid.limits.max_modulus)
        .and_then(|m| SearchTables::build(m, &grid.limits).map(|t| (m, t)));
    let (modulus, tables) = match prepared {
        Ok(v) => v,
        Err(e) => {
            report.status = match e {
                Error::CapExceeded { .. } => Status::Skipped,
                _ => Status::Fail,
            };
            report.skip_reason = Some(e.to_string());
            report.elapsed_ms = ms(start);
            return report;
        }
    };
    let options = SweepOptions::both();
    for f2 in search::select_f2(modulus, pt.mode) {
        let r2 = modulus.residue(f2 as i64);
        let mut record = match search::opt_record(modulus, r2, Some(&tables), SweepOptions { formula: false, ..options }, &grid.limits) {
            Ok(r) => r,
            Err(e) => {
                report.status = Status::Fail;
                report.skip_reason = Some(e.to_string());
                break;
            }
        };
        record.opt_formula = match formulas::formula_opt_with(modulus, r2, &grid.limits, grid.fault) {
            Ok(v) => Some(v),
            Err(e) => {
                report.status = Status::Fail;
                report.skip_reason = Some(e.to_string());
                break;
            }
        };
        report.comparisons += 1;
        if record.opt_brute == Some(Length::Infinite) {
            report.infinite_f2.push(f2);
        }
        if formulas::predicts_infinite(modulus, r2) {
            report.predicted_infinite_f2.push(f2);
        }
        if record.disagrees() {
            report.status = Status::Fail;
            report.mismatches.push(record);
        }
    }
    report.elapsed_ms = ms(start);
    report
}

/// Runs the selected property suites.
pub fn verify_lemmas(grid: &GridSpec) -> VerifyReport {
    let start = Instant::now();
    let lemmas = grid.install(|| {
        grid.lemmas
            .par_iter()
            .map(|&suite| {
                let t = Instant::now();
                let mut report = LemmaReport::new(suite.name());
                if let Err(e) = run_suite(suite, grid, &mut report) {
                    report.error(e);
                }
                report.elapsed_ms = ms(t);
                report
            })
            .collect::<Vec<_>>()
    });
    VerifyReport::assemble(Vec::new(), lemmas, ms(start))
}

/// [`verify_main`] followed by [`verify_lemmas`], merged into one report.
pub fn verify(grid: &GridSpec) -> VerifyReport {
    let start = Instant::now();
    let main = verify_main(grid);
    let lemmas = verify_lemmas(grid);
    let mut all = main.lemmas;
    all.extend(lemmas.lemmas);
    VerifyReport::assemble(main.points, all, ms(start))
}

struct Tables {
    limits: Limits,
    built: HashMap<(u64, u32), SearchTables>,
}

impl Tables {
    fn new(limits: Limits) -> Self {
        Tables {
            limits,
            built: HashMap::new(),
        }
    }

    fn get(&mut self, p: u64, s: u32) -> Result<&SearchTables> {
        if !self.built.contains_key(&(p, s)) {
            let modulus = PrimePowerModulus::with_cap(p, s, self.limits.max_modulus)?;
            self.built.insert((p, s), SearchTables::build(modulus, &self.limits)?);
        }
        Ok(&self.built[&(p, s)])
    }
}

fn all_polys(modulus: PrimePowerModulus) -> impl Iterator<Item = QuadPoly> {
    let m = modulus.modulus() as i64;
    (0..m).flat_map(move |f2| (0..m).flat_map(move |f1| (0..m).map(move |f0| QuadPoly::new(modulus, f2, f1, f0))))
}

fn run_suite(suite: LemmaSuite, grid: &GridSpec, report: &mut LemmaReport) -> Result<()> {
    let mut tables = Tables::new(grid.limits);
    match suite {
        LemmaSuite::Periodicity => {
            let t = tables.get(3, 2)?;
            let m = t.modulus().modulus();
            for f in all_polys(t.modulus()) {
                let len = buchi_length(&f, t.squares())?;
                let long = square_run_within(&f, 10 * m);
                let ok = match len {
                    Length::Infinite => long == 10 * m,
                    Length::Finite(n) => long == n,
                };
                report.check(ok, || format!("{f}: length {len}, ten-period run {long}"));
            }
        }
        LemmaSuite::SquarePolyOracle => {
            let t = tables.get(3, 2)?;
            for f in all_polys(t.modulus()) {
                check_square_oracle(report, t, &f)?;
            }
            let t = tables.get(3, 3)?;
            let m = t.modulus();
            let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
            for _ in 0..grid.oracle_samples {
                let [a, b, c] = [(); 3].map(|_| rng.gen_range(0..m.modulus()) as i64);
                check_square_oracle(report, t, &QuadPoly::new(m, a, b, c))?;
            }
        }
        LemmaSuite::NonsquareConstant => {
            for (p, s) in [(3, 2), (3, 3), (5, 2)] {
                let t = tables.get(p, s)?;
                let m = t.modulus();
                for f in all_polys(m) {
                    if constant_term_dominates(&f) && !m.is_square(f.coefficients()[2]) {
                        let len = buchi_length(&f, t.squares())?;
                        report.check(len == Length::Finite(0), || format!("{f}: length {len}"));
                    }
                }
            }
        }
        LemmaSuite::OddOrderBound => {
            for (p, s) in [(3, 3), (5, 2)] {
                let t = tables.get(p, s)?;
                let m = t.modulus();
                for f2 in 0..m.modulus() {
                    for f1 in 0..m.modulus() {
                        let min = m.ord(f1).min(m.ord(f2));
                        if min.is_odd_finite() {
                            let out = ml_f1(t, m.residue(f2 as i64), m.residue(f1 as i64))?;
                            report.check(out.length <= Length::Finite(2), || {
                                format!("mod {}: f2={f2} f1={f1} ml={}", m.modulus(), out.length)
                            });
                        }
                    }
                }
            }
        }
        LemmaSuite::LinearOddOrderBound => {
            for (p, s) in [(3, 3), (5, 2), (5, 3)] {
                let t = tables.get(p, s)?;
                let m = t.modulus();
                for f1 in (0..m.modulus()).filter(|&f1| m.ord(f1).is_odd_finite()) {
                    let out = ml_f1(t, m.residue(0), m.residue(f1 as i64))?;
                    report.check(out.length <= Length::Finite(1), || {
                        format!("mod {}: f2=0 f1={f1} ml={}", m.modulus(), out.length)
                    });
                }
            }
        }
        LemmaSuite::LowerBounds => {
            for pt in &grid.points {
                let t = match tables.get(pt.p, pt.s) {
                    Ok(t) => t,
                    Err(Error::CapExceeded { .. }) => continue,
                    Err(e) => return Err(e),
                };
                let m = t.modulus();
                let x = QuadPoly::new(m, 0, 1, 0);
                check_witness(report, t, &x, 1)?;
                for f2 in search::select_f2(m, pt.mode) {
                    if m.ord(f2) == ExtOrder::Finite(0) {
                        continue;
                    }
                    let f2 = f2 as i64;
                    // f(1) = 0, f(2) = 1
                    let f = QuadPoly::new(m, f2, 1 - 3 * f2, 2 * f2 - 1);
                    check_witness(report, t, &f, 2)?;
                }
            }
        }
        LemmaSuite::UnitSquareScaling => {
            for (p, s) in [(3, 2), (5, 2)] {
                let t = tables.get(p, s)?;
                let m = t.modulus();
                let mm = m.modulus();
                let lengths: Vec<Length> = (0..mm)
                    .map(|f2| ml_opt(t, m.residue(f2 as i64)).map(|o| o.length))
                    .collect::<Result<_>>()?;
                for c in (1..mm).filter(|c| c % p != 0) {
                    for f2 in 0..mm {
                        let scaled = c * c % mm * f2 % mm;
                        report.check(lengths[scaled as usize] == lengths[f2 as usize], || {
                            format!("mod {mm}: c={c} f2={f2}: {} vs {}", lengths[scaled as usize], lengths[f2 as usize])
                        });
                    }
                }
            }
        }
        LemmaSuite::LinearReduction => {
            for (p, s) in [(3, 2), (3, 3), (5, 2)] {
                let base = tables.get(p, 1)?.clone();
                let t = tables.get(p, s)?;
                let m = t.modulus();
                let pm = base.modulus();
                for f2 in (0..m.modulus()).filter(|f2| f2 % p == 0) {
                    for f1 in (0..m.modulus()).filter(|f1| f1 % p != 0) {
                        let high = ml_f1(t, m.residue(f2 as i64), m.residue(f1 as i64))?.opt();
                        let low = ml_f1(&base, pm.residue(0), pm.residue((f1 % p) as i64))?.opt();
                        report.check(high == low, || {
                            format!("mod {}: f2={f2} f1={f1}: {high} vs opt(p,0,f1)={low}", m.modulus())
                        });
                    }
                }
            }
        }
        LemmaSuite::LeadingOrderReduction => {
            for (p, s) in [(3u64, 3u32), (5, 2)] {
                for f2 in 1..p.pow(s) {
                    let Some(t2) = PrimePowerModulus::new(p, s)?.ord(f2).finite() else { continue };
                    if t2 % 2 == 1 {
                        continue;
                    }
                    let lower_tables = tables.get(p, s - t2)?.clone();
                    let t = tables.get(p, s)?;
                    let m = t.modulus();
                    let lower = lower_tables.modulus();
                    let scale = p.pow(t2);
                    for f1 in (0..m.modulus()).filter(|&f1| m.ord(f1) >= ExtOrder::Finite(t2)) {
                        let high = ml_f1(t, m.residue(f2 as i64), m.residue(f1 as i64))?.opt();
                        let g2 = lower.residue((f2 / scale) as i64);
                        let g1 = lower.residue((f1 / scale) as i64);
                        let low = ml_f1(&lower_tables, g2, g1)?.opt();
                        report.check(high == low, || {
                            format!(
                                "mod {}: f2={f2} f1={f1}: {high} vs opt({}, {}, {})={low}",
                                m.modulus(),
                                lower.modulus(),
                                g2.value(),
                                g1.value()
                            )
                        });
                    }
                }
            }
        }
        LemmaSuite::HensleyBound => {
            for p in [3u64, 5, 7, 11, 13] {
                let t = tables.get(p, 1)?;
                let m = t.modulus();
                for f2 in (1..p).filter(|&g| qr_mod_p(g, p)) {
                    let out = ml_opt(t, m.residue(f2 as i64))?;
                    report.check(out.length < Length::Finite(p), || format!("p={p} f2={f2}: ml={}", out.length));
                }
            }
        }
        LemmaSuite::NonresidueIndependence => {
            for p in [5u64, 7, 11] {
                let t = tables.get(p, 1)?;
                let m = t.modulus();
                let n = least_non_residue(p);
                let reference = ml_opt(t, m.residue(n as i64))?.opt();
                for u in (1..p).filter(|&u| !qr_mod_p(u, p)) {
                    let v = ml_opt(t, m.residue(u as i64))?.opt();
                    report.check(v == reference, || format!("p={p}: opt(p,{u})={v} but opt(p,{n})={reference}"));
                }
            }
        }
        LemmaSuite::LinearConstantBound => {
            for p in [3u64, 5, 7, 11, 13] {
                let t = tables.get(p, 1)?;
                let opt = ml_opt(t, t.modulus().residue(0))?.opt();
                report.check(opt <= Length::Finite((p + 3) / 2), || format!("p={p}: opt(p,0)={opt}"));
            }
        }
    }
    Ok(())
}

fn check_square_oracle(report: &mut LemmaReport, t: &SearchTables, f: &QuadPoly) -> Result<()> {
    let fast = is_square_poly(f, t.index())?;
    let root = square_root_bounded(f, crate::polyspace::DEFAULT_ORACLE_DEGREE, DEFAULT_ORACLE_BUDGET)?;
    report.check(fast == root.is_some(), || {
        format!("{f}: decision {fast}, degree-4 root {:?}", root)
    });
    Ok(())
}

fn check_witness(report: &mut LemmaReport, t: &SearchTables, f: &QuadPoly, min_len: u64) -> Result<()> {
    let len = buchi_length(f, t.squares())?;
    let trivial = is_square_poly(f, t.index())?;
    report.check(!trivial && len >= Length::Finite(min_len), || {
        format!("{f}: length {len}, trivial {trivial}, expected non-trivial with length >= {min_len}")
    });
    Ok(())
}
