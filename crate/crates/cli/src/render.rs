//! Text renderings (csv, pretty) of the JSON objects the CLI emits.

use std::fmt::Write as _;

use infmul::io::round_sig;
use infmul::selftest::CheckResult;
use infmul::{CumulantVector, DualScalar, DualSeries, McEstimate, TCoeffVector, C64};

fn num(x: f64) -> String {
    format!("{}", round_sig(x))
}

fn complex(z: C64) -> String {
    if round_sig(z.im) == 0.0 {
        num(z.re)
    } else {
        format!("{}{:+}i", num(z.re), round_sig(z.im))
    }
}

fn dual(d: DualScalar) -> String {
    format!("{} + ε·{}", complex(d.body), complex(d.eps))
}

/// Rows `n, re, im, eps_re, eps_im` for indexed dual values.
fn dual_rows(header: &str, start: usize, values: &[DualScalar]) -> String {
    let mut out = format!("{header},re,im,eps_re,eps_im\n");
    for (i, d) in values.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            i + start,
            num(d.body.re),
            num(d.body.im),
            num(d.eps.re),
            num(d.eps.im)
        );
    }
    out
}

fn dual_lines(label: &str, start: usize, values: &[DualScalar]) -> String {
    values
        .iter()
        .enumerate()
        .map(|(i, &d)| format!("{label}{}: {}\n", i + start, dual(d)))
        .collect()
}

pub fn series_csv(f: &DualSeries) -> String {
    dual_rows("n", 0, f.coeffs())
}

pub fn series_pretty(name: &str, f: &DualSeries) -> String {
    let mut out = format!("{name}(z), K = {}\n", f.order());
    out += &dual_lines("z^", 0, f.coeffs());
    out
}

pub fn law_csv(m: &[DualScalar]) -> String {
    dual_rows("n", 1, m)
}

pub fn law_pretty(m: &[DualScalar]) -> String {
    dual_lines("m", 1, m)
}

pub fn cumulants_csv(k: &CumulantVector) -> String {
    dual_rows("n", 1, k.values())
}

pub fn cumulants_pretty(k: &CumulantVector) -> String {
    dual_lines("kappa", 1, k.values())
}

pub fn tcoeffs_csv(t: &TCoeffVector) -> String {
    dual_rows("n", 0, t.values())
}

pub fn tcoeffs_pretty(t: &TCoeffVector) -> String {
    dual_lines("t", 0, t.values())
}

pub fn mc_pretty(e: &McEstimate) -> String {
    let mut out = format!(
        "{} experiment: c = {}, c' = {}, trials = {}, seed = {}\n",
        e.experiment, e.config.c, e.config.c_prime, e.config.trials, e.config.seed
    );
    let _ = writeln!(
        out,
        "{:>6} {:>6} {:>2} {:>16} {:>12} {:>12} {:>14} {:>12}",
        "N", "M", "k", "mean", "stderr", "phi", "N(mean-phi)", "phi'"
    );
    for r in &e.rows {
        let _ = writeln!(
            out,
            "{:>6} {:>6} {:>2} {:>16.10} {:>12.3e} {:>12.6} {:>14.6} {:>12.6}",
            r.n, r.m, r.k, r.mean, r.stderr, r.phi_pred, r.phi_prime_est, r.phi_prime_pred
        );
    }
    out += "extrapolated:\n";
    for x in &e.extrapolated {
        let _ = writeln!(
            out,
            "  k={} phi {:.6} ± {:.2e} (pred {:.6}) {}   phi' {:.4} ± {:.2e} (pred {:.4}) {}",
            x.k,
            x.phi_est,
            x.phi_stderr,
            x.phi_pred,
            if x.phi_ok { "ok" } else { "FAIL" },
            x.phi_prime_est,
            x.phi_prime_stderr,
            x.phi_prime_pred,
            if x.phi_prime_ok { "ok" } else { "FAIL" },
        );
    }
    out
}

pub fn checks_csv(results: &[CheckResult]) -> String {
    let mut out = String::from("criterion,name,pass,seconds\n");
    for r in results {
        let _ = writeln!(out, "{},{},{},{:.3}", r.id, r.name, r.pass, r.seconds);
    }
    out
}
