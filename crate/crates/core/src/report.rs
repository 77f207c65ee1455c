//! Report rendering: byte-stable JSON and a plain-text table.

use std::fmt::Write;

use crate::classify::ClassificationReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Table,
}

pub fn emit_report(report: &ClassificationReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => to_json(report),
        ReportFormat::Table => to_table(report),
    }
}

/// Six significant digits in scientific notation; non-finite values become `null`.
pub fn fmt_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.5e}")
    } else {
        "null".to_string()
    }
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

struct Obj {
    out: String,
    indent: usize,
    first: bool,
}

impl Obj {
    fn new(indent: usize) -> Self {
        Obj { out: "{".to_string(), indent, first: true }
    }

    fn field(&mut self, key: &str, raw: impl AsRef<str>) -> &mut Self {
        if !self.first {
            self.out.push(',');
        }
        self.first = false;
        let pad = "  ".repeat(self.indent + 1);
        let _ = write!(self.out, "\n{pad}{}: {}", quote(key), raw.as_ref());
        self
    }

    fn finish(&mut self) -> String {
        if !self.first {
            let _ = write!(self.out, "\n{}", "  ".repeat(self.indent));
        }
        self.out.push('}');
        std::mem::take(&mut self.out)
    }
}

fn array(items: Vec<String>, indent: usize) -> String {
    if items.is_empty() {
        return "[]".to_string();
    }
    let pad = "  ".repeat(indent + 1);
    let body: Vec<String> = items.iter().map(|s| format!("{pad}{s}")).collect();
    format!("[\n{}\n{}]", body.join(",\n"), "  ".repeat(indent))
}

/// JSON document with a fixed key order.
pub fn to_json(r: &ClassificationReport) -> String {
    let spectrum: Vec<String> = r
        .spectrum
        .eigenvalues
        .iter()
        .map(|e| format!("{{\"value\": {}, \"multiplicity\": {}}}", fmt_real(e.value), e.multiplicity))
        .collect();
    let mut residuals = Obj::new(1);
    for (k, v) in &r.residuals.entries {
        residuals.field(k, fmt_real(*v));
    }
    let mut o = Obj::new(0);
    o.field("name", quote(&r.name))
        .field("verdict", quote(r.verdict.as_str()))
        .field("spectrum", array(spectrum, 1))
        .field("residuals", residuals.finish())
        .field("c_norm", fmt_real(r.c_norm))
        .field("parallel_residual", fmt_real(r.parallel_residual))
        .field("spectrum_constancy", fmt_real(r.spectrum.constancy))
        .field("block_splitting", r.block_splitting.map_or("null".to_string(), fmt_real));
    if let Some(w) = &r.witness {
        let c = w.mean().0.iter().map(|x| fmt_real(*x)).collect::<Vec<_>>().join(", ");
        let mut wo = Obj::new(1);
        wo.field("a", fmt_real(w.a))
            .field("b", fmt_real(w.b))
            .field("causal_type", quote(w.causal_type.as_str()))
            .field("constancy", fmt_real(w.constancy))
            .field("causal_norm", fmt_real(w.causal_norm))
            .field("measured_norm", fmt_real(w.measured_norm))
            .field("c_y_residual", fmt_real(w.c_y_residual))
            .field("splitting_residual", fmt_real(w.splitting_residual))
            .field("c", format!("[{c}]"));
        o.field("witness", wo.finish());
    }
    let opts = &r.options;
    let mut tol = Obj::new(1);
    tol.field("tol", fmt_real(opts.tol))
        .field("tol_sum", fmt_real(opts.tol_sum))
        .field("cluster", fmt_real(opts.cluster_tol))
        .field("causal", fmt_real(opts.causal_tol))
        .field("witness", fmt_real(opts.witness_tol));
    o.field("failures", array(r.failures.iter().map(|f| quote(f)).collect(), 1))
        .field("samples", opts.samples.to_string())
        .field("order", opts.order.to_string())
        .field("seed", opts.seed.to_string())
        .field("tolerances", tol.finish());
    let mut s = o.finish();
    s.push('\n');
    s
}

/// Human-readable summary.
pub fn to_table(r: &ClassificationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<20} {}", "name", r.name);
    let _ = writeln!(s, "{:<20} {}", "verdict", r.verdict);
    let spec: Vec<String> =
        r.spectrum.eigenvalues.iter().map(|e| format!("{} (x{})", fmt_real(e.value), e.multiplicity)).collect();
    let _ = writeln!(s, "{:<20} {}", "spectrum", spec.join(", "));
    let _ = writeln!(s, "{:<20} {}", "c_norm", fmt_real(r.c_norm));
    let _ = writeln!(s, "{:<20} {}", "parallel_residual", fmt_real(r.parallel_residual));
    let _ = writeln!(s, "{:<20} {}", "spectrum_constancy", fmt_real(r.spectrum.constancy));
    if let Some(b) = r.block_splitting {
        let _ = writeln!(s, "{:<20} {}", "block_splitting", fmt_real(b));
    }
    if let Some(w) = &r.witness {
        let _ = writeln!(s, "{:<20} a = {}, b = {}", "witness", fmt_real(w.a), fmt_real(w.b));
        let _ = writeln!(s, "{:<20} {} (2a+b^2 = {})", "", w.causal_type.as_str(), fmt_real(w.causal_norm));
        let _ = writeln!(s, "{:<20} constancy {}", "", fmt_real(w.constancy));
    }
    let _ = writeln!(s, "residuals");
    for (k, v) in &r.residuals.entries {
        let _ = writeln!(s, "  {:<18} {}", k, fmt_real(*v));
    }
    for f in &r.failures {
        let _ = writeln!(s, "failure: {f}");
    }
    let _ = writeln!(
        s,
        "samples {}, order {}, seed {}, tol {}",
        r.options.samples,
        r.options.order,
        r.options.seed,
        fmt_real(r.options.tol)
    );
    s
}
