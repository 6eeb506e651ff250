//! The acceptance suite: twelve criteria, exact equality throughout, one
//! PASS/FAIL line per criterion with its wall time. Exits non-zero if any
//! criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use weyl_frobenius::document::StructureDocument;
use weyl_frobenius::exactalg::matrix::det;
use weyl_frobenius::exactalg::{rat, Poly};
use weyl_frobenius::fixtures::{self, ComparisonReport};
use weyl_frobenius::flatcoords::{b_coefficients, normal_form_pattern};
use weyl_frobenius::frobenius::{build_structure, FrobeniusStructure};
use weyl_frobenius::metrics::{self, build_pencil, det_eta_closed_form, eta_closed_form};
use weyl_frobenius::orbitspace::compute_g_direct;
use weyl_frobenius::rootdata::{dual_index, flat_degrees, RootSystemSpec};

struct Outcome {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Outcome {
        Outcome {
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }
}

fn all_specs(max_l: usize) -> Vec<RootSystemSpec> {
    (1..=max_l)
        .flat_map(|l| (1..=l).map(move |k| RootSystemSpec::c(l, k).unwrap()))
        .collect()
}

/// The fifteen structures with l ≤ 5, built on first use.
struct Structures(Option<Vec<FrobeniusStructure>>);

impl Structures {
    fn get(&mut self, o: &mut Outcome) -> &[FrobeniusStructure] {
        if self.0.is_none() {
            let mut v = Vec::new();
            for s in all_specs(5) {
                match build_structure(&s) {
                    Ok(st) => v.push(st),
                    Err(e) => o.failures.push(format!("{s}: construction failed: {e}")),
                }
            }
            self.0 = Some(v);
        }
        self.0.as_deref().unwrap()
    }
}

fn fixture_outcome(o: &mut Outcome, id: &str) -> Option<ComparisonReport> {
    let fx = fixtures::fixture(id).unwrap();
    match fixtures::compare(fx) {
        Ok(r) => {
            for s in &r.sections {
                for d in &s.diffs {
                    o.failures.push(format!("{}: {d}", s.name));
                }
            }
            o.check(r.matched, format!("{id} does not match"));
            o.notes.push(format!(
                "{} terms expected, {} computed{}",
                r.expected_terms,
                r.computed_terms,
                if r.sign_flipped { ", matched after s -> -s" } else { "" }
            ));
            Some(r)
        }
        Err(e) => {
            o.failures.push(format!("{id}: {e}"));
            None
        }
    }
}

fn coefficient(o: &mut Outcome, st: &FrobeniusStructure, text: &str) {
    let want = Poly::parse(&st.chart, text).unwrap();
    let (m, c) = want.terms().next().map(|(m, c)| (m.clone(), c.clone())).unwrap();
    let got = st.potential.f.coeff(&m);
    o.check(got == c, format!("coefficient of {text}: got {got}"));
}

fn c1(o: &mut Outcome) {
    fixture_outcome(o, "c3k1");
    let st = build_structure(&RootSystemSpec::c(3, 1).unwrap()).unwrap();
    coefficient(o, &st, "1/48*t2^3*t3^-1");
    coefficient(o, &st, "-1/36288*t3^8");
    o.notes.push("the printed potential has 9 terms; the stated count of 18 is not used".into());
}

fn c2(o: &mut Outcome) {
    fixture_outcome(o, "c4k1");
    let st = build_structure(&RootSystemSpec::c(4, 1).unwrap()).unwrap();
    coefficient(o, &st, "1/4320*t3^5*t4^-3");
    coefficient(o, &st, "-1/7603200*t4^12");
    o.check(st.pipeline.change.c[0][1] == rat(-1, 6), "z2 coefficient of y3");
    o.check(st.pipeline.change.c[0][2] == rat(1, 30), "z2 coefficient of y4");
    let wch = st.pipeline.w.stage.eta.chart.clone();
    let h2 = Poly::parse(&wch, "-1/12*w3^2").unwrap();
    o.check(st.pipeline.t.h.iter().any(|(j, h)| *j == 2 && *h == h2), "h2 = -1/12 w3^2");
}

fn c3(o: &mut Outcome) {
    fixture_outcome(o, "c4k2");
    let st = build_structure(&RootSystemSpec::c(4, 2).unwrap()).unwrap();
    coefficient(o, &st, "1/4*E^4");
    coefficient(o, &st, "1/48*t3^3*t4^-1");
    let want = [rat(1, 2), rat(1, 1), rat(3, 4), rat(1, 4)];
    o.check(st.euler.linear == want, format!("Euler linear part {:?}", st.euler.linear));
    o.check(st.euler.last == rat(1, 2), format!("Euler last component {}", st.euler.last));
}

fn c4(o: &mut Outcome, all: &mut Structures) {
    let sts = all.get(o).to_vec();
    o.check(sts.len() == 15, format!("{} of 15 structures built", sts.len()));
    for st in &sts {
        let r = st.verify_wdvv();
        o.check(r.passed, format!("{}: {} nonzero residuals, first {:?}", st.spec, r.residuals.len(), r.residuals.first()));
    }
}

fn c5(o: &mut Outcome, all: &mut Structures) {
    let sts = all.get(o).to_vec();
    for st in &sts {
        let want = normal_form_pattern(&st.spec);
        if st.eta != want {
            let cells: Vec<String> = (0..want.len())
                .flat_map(|i| (0..want.len()).map(move |j| (i, j)))
                .filter(|&(i, j)| st.eta[i][j] != want[i][j])
                .map(|(i, j)| format!("η^({},{}) = {} vs {}", i + 1, j + 1, st.eta[i][j], want[i][j]))
                .collect();
            o.failures.push(format!("{}: {}", st.spec, cells.join(", ")));
        }
    }
}

fn c6(o: &mut Outcome) {
    for s in all_specs(6) {
        let p = build_pencil(&s).unwrap();
        let d = det(&p.eta.m, &p.chart);
        let want = det_eta_closed_form(&s);
        o.check(d == want, format!("{s}: det η = {d}, formula gives {want}"));
    }
}

fn c7(o: &mut Outcome) {
    for s in all_specs(6) {
        let p = build_pencil(&s).unwrap();
        let want = eta_closed_form(&s);
        o.check(p.eta.m == want.m, format!("{s}: ∂g/∂y^k differs from the closed form"));
    }
}

fn c8(o: &mut Outcome) {
    for s in all_specs(3) {
        let p = build_pencil(&s).unwrap();
        let d = compute_g_direct(&s, 3).unwrap();
        o.check(p.g.m == d.m, format!("{s}: generating-function g differs from the direct form"));
    }
    for l in 2..=3 {
        for k in 1..=l {
            let s = RootSystemSpec::b(l, k).unwrap();
            let pulled = metrics::b_form_from_c(&s).unwrap();
            let d = compute_g_direct(&s, 3).unwrap();
            o.check(pulled.m == d.m, format!("{s}: pulled-back C_l form differs from the direct B_l form"));
        }
    }
}

fn c9(o: &mut Outcome, all: &mut Structures) {
    let sts = all.get(o).to_vec();
    for st in &sts {
        let r = st.verify_euler_unity();
        o.check(r.passed, format!("{}: {:?}", st.spec, r.residuals));
    }
    for s in all_specs(8) {
        let dt = flat_degrees(&s);
        for i in 1..=s.rank() + 1 {
            let j = dual_index(&s, i);
            o.check(&dt[i - 1] + &dt[j - 1] == rat(1, 1), format!("{s}: d̃_{i} + d̃_{j} ≠ 1"));
        }
    }
}

fn c10(o: &mut Outcome) {
    match b_coefficients(8) {
        Ok(b) => {
            o.check(b.get(1, 2) == rat(1, 6), format!("B^1_2 = {}", b.get(1, 2)));
            o.check(b.get(2, 3) == rat(1, 4), format!("B^2_3 = {}", b.get(2, 3)));
            o.check(b.get(1, 3) == rat(1, 120), format!("B^1_3 = {}", b.get(1, 3)));
        }
        Err(e) => o.failures.push(e.to_string()),
    }
}

fn c11(o: &mut Outcome, all: &mut Structures) {
    let sts = all.get(o).to_vec();
    for st in sts.iter().filter(|s| s.spec.rank() <= 4) {
        let r = st.verify_intersection();
        o.check(r.passed, format!("{}: {} residuals, first {:?}", st.spec, r.residuals.len(), r.residuals.first()));
    }
}

fn c12(o: &mut Outcome) {
    let bin = env!("CARGO_BIN_EXE_weyl-frobenius");
    let dir = std::env::temp_dir().join(format!("weyl-frobenius-acceptance-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let doc = dir.join("c3k1.json");
    let run = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let out = run(&["construct", "--family", "C", "--rank", "3", "--vertex", "1", "--out", doc.to_str().unwrap()]);
    o.check(out.status.code() == Some(0), format!("construct exited with {:?}", out.status.code()));
    let text = fs::read_to_string(&doc).unwrap_or_default();
    match StructureDocument::from_json(&text) {
        Ok(d) => {
            let again = d.to_json();
            o.check(again == text, "export -> import -> export is not byte-identical");
            let twice = StructureDocument::from_json(&again).map(|d| d.to_json());
            o.check(twice.as_deref() == Ok(text.as_str()), "second round trip differs");
            let mut m = BTreeMap::new();
            m.insert("t2".to_string(), 3);
            m.insert("t3".to_string(), -1);
            let c = d.potential.f.iter().find(|t| t.monomial == m).map(|t| t.coefficient.clone());
            o.check(c.as_deref() == Some("1/48"), format!("term {{t2:3, t3:-1}} has coefficient {c:?}"));
        }
        Err(e) => o.failures.push(format!("import failed: {e}")),
    }
    let out = run(&["verify", "--input", doc.to_str().unwrap(), "--checks", "wdvv"]);
    o.check(out.status.code() == Some(0), format!("verify of the exported document exited with {:?}", out.status.code()));

    let truncated = dir.join("truncated.json");
    fs::write(&truncated, &text[..text.len() / 3]).unwrap();
    let out = run(&["verify", "--input", truncated.to_str().unwrap()]);
    o.check(out.status.code() == Some(2), format!("truncated input exited with {:?}, expected 2", out.status.code()));

    let altered = dir.join("altered.json");
    fs::write(&altered, text.replacen("\"1/48\"", "\"1/47\"", 1)).unwrap();
    let out = run(&["verify", "--input", altered.to_str().unwrap(), "--checks", "wdvv"]);
    o.check(out.status.code() == Some(1), format!("altered coefficient exited with {:?}, expected 1", out.status.code()));

    let out = run(&["construct", "--family", "C", "--rank", "2", "--vertex", "3"]);
    o.check(out.status.code() == Some(2), format!("vertex out of range exited with {:?}, expected 2", out.status.code()));
    let out = run(&["verify", "--family", "C", "--rank", "2", "--vertex", "1", "--checks", "curvature"]);
    o.check(out.status.code() == Some(2), format!("unknown check exited with {:?}, expected 2", out.status.code()));
    let _ = fs::remove_dir_all(&dir);
}

fn main() {
    let mut all = Structures(None);
    let secs = |n| Some(Duration::from_secs(n));
    let total = Instant::now();
    let results = [
        run(1, "fixture c3k1: potential and flat coordinates", secs(5), &mut c1),
        run(2, "fixture c4k1: potential, z-chart and h2", secs(30), &mut c2),
        run(3, "fixture c4k2: potential and Euler field", secs(30), &mut c3),
        run(4, "WDVV for the 15 structures with l ≤ 5", secs(600), &mut |o: &mut Outcome| c4(o, &mut all)),
        run(5, "η in flat coordinates equals the normal-form pattern (l ≤ 5)", None, &mut |o: &mut Outcome| c5(o, &mut all)),
        run(6, "det η closed form (l ≤ 6)", None, &mut c6),
        run(7, "η closed form equals ∂g/∂y^k (l ≤ 6)", None, &mut c7),
        run(8, "generating-function and pulled-back forms equal the direct forms", None, &mut c8),
        run(9, "unity, quasi-homogeneity and duality", None, &mut |o: &mut Outcome| c9(o, &mut all)),
        run(10, "B-coefficients: recursion equals series to order 8", None, &mut c10),
        run(11, "g = L_E F^ij and Γ = d̃ c (l ≤ 4)", None, &mut |o: &mut Outcome| c11(o, &mut all)),
        run(12, "CLI round trip and exit codes", None, &mut c12),
    ];
    let passed = results.iter().filter(|&&r| r).count();
    println!("acceptance: {passed}/{} criteria passed in {:.2?}", results.len(), total.elapsed());
    if passed != results.len() {
        std::process::exit(1);
    }
}

fn run(n: usize, name: &str, limit: Option<Duration>, f: &mut dyn FnMut(&mut Outcome)) -> bool {
    let mut o = Outcome::new();
    let t = Instant::now();
    f(&mut o);
    let el = t.elapsed();
    if let Some(lim) = limit {
        o.check(el < lim, format!("took {el:.2?}, limit {lim:?}"));
    }
    let ok = o.failures.is_empty();
    println!("[{}] {n:>2}. {name} ({el:.3?})", if ok { "PASS" } else { "FAIL" });
    for x in &o.notes {
        println!("        note: {x}");
    }
    for x in &o.failures {
        println!("        {x}");
    }
    ok
}
