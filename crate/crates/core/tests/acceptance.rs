//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines are always printed.

use ncgeom::curvature::{
    abelianize, abelianize_matrix, compare_with, ricci_density, scalar_density, DensityMatrix, Grid, Object,
};
use ncgeom::metric::{Form, MetricDescriptor};
use ncgeom::reference::{classical_ricci, classical_scalar, eval_reference};
use ncgeom::resolvent::{check_parametrix, parametrix};
use ncgeom::verify;
use std::time::{Duration, Instant};

const APPENDIX_B_TOL: f64 = 1e-8;
const APPENDIX_B_POINTS: usize = 20;
const APPENDIX_B_LIMIT: Duration = Duration::from_secs(30);
const GRID_TOL: f64 = 1e-6;
const GRID_POINTS: usize = 25;
const CONFORMAL_SCALAR_LIMIT: Duration = Duration::from_secs(120);
const NONCONFORMAL_LIMIT: Duration = Duration::from_secs(15 * 60);
const LIMIT_EPS: f64 = 1e-4;
const LIMIT_TOL: f64 = 1e-3;
const STRUCTURE_POINTS: usize = 100;
const STRUCTURE_TOL: f64 = 1e-10;
const PRODUCT_TOL: f64 = 1e-6;
const SEED: u64 = 7;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn grid() -> Grid {
    Grid::linspace(-3.0, 3.0, GRID_POINTS)
}

fn compare_all(m: &MetricDescriptor, parts: &[(Object, &DensityMatrix)]) -> (bool, String) {
    let mut pass = true;
    let mut detail = Vec::new();
    for (object, engine) in parts {
        match compare_with(m, *object, engine, &grid(), GRID_TOL) {
            Ok(r) => {
                pass &= r.pass;
                detail.push(format!("{} worst {:.2e} over {} words", r.object, r.worst_rel_err, r.tables.len()));
            }
            Err(e) => {
                pass = false;
                detail.push(format!("{}: {}", object.name(), e));
            }
        }
    }
    (pass, detail.join("; "))
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let r = verify::appendix_b(APPENDIX_B_POINTS, APPENDIX_B_TOL, SEED);
    let el = t.elapsed();
    outcome(r.pass && el < APPENDIX_B_LIMIT, format!("{} checks, worst rel {:.2e}, {:.2?}", r.checks.len(), r.worst, el))
}

fn criterion_2() -> Outcome {
    let m = MetricDescriptor::conformal3();
    let t = Instant::now();
    let engine = match scalar_density(&m) {
        Ok(s) => DensityMatrix { n: 1, entries: vec![s] },
        Err(e) => return outcome(false, e.to_string()),
    };
    let (pass, detail) = compare_all(&m, &[(Object::Scalar, &engine)]);
    let el = t.elapsed();
    outcome(pass && el < CONFORMAL_SCALAR_LIMIT, format!("{}, {:.2?}", detail, el))
}

fn criterion_3(tables: &verify::EngineTables) -> Outcome {
    let m = MetricDescriptor::conformal3();
    let ricci = ncgeom::curvature::ricci_from_parts(&tables.conformal_scalar.entries[0], &tables.conformal_one_form);
    let (pass, detail) = compare_all(&m, &[(Object::OneForm, &tables.conformal_one_form), (Object::Ricci, &ricci)]);
    outcome(pass, detail)
}

fn criterion_4(tables: &verify::EngineTables) -> Outcome {
    let m = MetricDescriptor::nonconformal3();
    let (pass, detail) = compare_all(&m, &[(Object::Scalar, &tables.nonconformal_scalar)]);
    outcome(pass, detail)
}

fn criterion_5() -> Outcome {
    let m = MetricDescriptor::nonconformal3();
    let t = Instant::now();
    let (one, ric) = match (ncgeom::curvature::one_form_density(&m), ricci_density(&m)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return outcome(false, e.to_string()),
    };
    let (pass, detail) = compare_all(&m, &[(Object::OneForm, &one), (Object::Ricci, &ric)]);
    let el = t.elapsed();
    // the reference H₄ carries the opposite sign to the printed closed form
    let x = [0.7, -1.3];
    let flipped = (eval_reference("H4", &x).unwrap_or(0.0) + eval_reference("H4_printed", &x).unwrap_or(1.0)).abs() < 1e-14;
    outcome(pass && flipped && el < NONCONFORMAL_LIMIT, format!("{}, {:.2?}; H4 used with sign reversed from the printed form", detail, el))
}

fn criterion_6(tables: &verify::EngineTables) -> Outcome {
    let r = verify::limits(tables, LIMIT_EPS, LIMIT_TOL);
    let fails: Vec<String> = r.failures().map(|c| format!("{}{:?}", c.name, c.point)).collect();
    outcome(r.pass, format!("{} checks, worst abs {:.2e} {}", r.checks.len(), r.worst, fails.join(" ")))
}

fn criterion_7() -> Outcome {
    match verify::appendix_a() {
        Ok(r) => {
            let spots = r.checks.iter().filter(|c| !c.name.contains("differing")).count();
            outcome(r.pass && spots >= 10, format!("{} exact checks ({} spot coefficients)", r.checks.len(), spots))
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn criterion_8() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for m in [MetricDescriptor::conformal3(), MetricDescriptor::nonconformal3()] {
        let s = scalar_density(&m).and_then(|c| abelianize(&c, &m));
        let r = ricci_density(&m).and_then(|d| abelianize_matrix(&d, &m));
        match (s, r) {
            (Ok(s), Ok(r)) => {
                let ok_s = s == classical_scalar(&m);
                let ok_r = r == classical_ricci(&m);
                pass &= ok_s && ok_r;
                detail.push(format!("{} scalar {} ricci {}", m.name(), ok_s, ok_r));
            }
            (Err(e), _) | (_, Err(e)) => {
                pass = false;
                detail.push(format!("{}: {}", m.name(), e));
            }
        }
    }
    outcome(pass, detail.join("; "))
}

fn criterion_9() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for m in [MetricDescriptor::conformal3(), MetricDescriptor::nonconformal3(), MetricDescriptor::conformal2()] {
        let mut forms = vec![Form::Functions];
        if m.has_one_forms() {
            forms.push(Form::OneForms);
        }
        for f in forms {
            let ok = parametrix(&m, f).and_then(|t| check_parametrix(&m, &t)).unwrap_or(false);
            pass &= ok;
            detail.push(format!("{} {:?} {}", m.name(), f, ok));
        }
    }
    outcome(pass, detail.join("; "))
}

fn criterion_10() -> Outcome {
    match verify::structure(STRUCTURE_POINTS, STRUCTURE_TOL, SEED) {
        Ok(r) => outcome(r.pass, format!("{} checks, worst {:.2e}", r.checks.len(), r.worst)),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn criterion_11() -> Outcome {
    match verify::product_decomposition(STRUCTURE_POINTS, PRODUCT_TOL, SEED) {
        Ok(r) => outcome(r.pass, format!("{} checks, worst rel {:.2e}; K1 = sqrt(pi) K(2-torus)", r.checks.len(), r.worst)),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn main() {
    // `cargo test -- --list` and filters are accepted and ignored
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let tables = match verify::EngineTables::build() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("engine build failed: {}", e);
            std::process::exit(1);
        }
    };
    let results: Vec<(&str, Outcome)> = vec![
        ("1 rearrangement closed forms vs quadrature", criterion_1()),
        ("2 conformal scalar curvature", criterion_2()),
        ("3 conformal 1-form density and Ricci", criterion_3(&tables)),
        ("4 non-conformal scalar curvature", criterion_4(&tables)),
        ("5 non-conformal 1-form density and Ricci", criterion_5()),
        ("6 limits at the origin", criterion_6(&tables)),
        ("7 symbol expansion regression", criterion_7()),
        ("8 abelianization", criterion_8()),
        ("9 parametrix property", criterion_9()),
        ("10 structural properties", criterion_10()),
        ("11 product decomposition", criterion_11()),
    ];
    let mut all = true;
    for (name, o) in &results {
        all &= o.pass;
        println!("criterion {:<44} {}  {}", name, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {}/{} criteria pass", results.iter().filter(|(_, o)| o.pass).count(), results.len());
    if !all {
        std::process::exit(1);
    }
}
