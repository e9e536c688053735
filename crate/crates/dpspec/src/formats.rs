//! Output formats: sweep CSV, calibration table, spectrum listing and the
//! DPSA1 dense-matrix container.

use std::io::{self, Read, Write};
use std::path::Path;

use dpspec_core::nalgebra::DMatrix;
use dpspec_core::spectral::SpectrumSummary;

pub const CURVE_HEADER: &str = "eps,delta,param,err_mean,err_stderr,trials,runtime_ms";
pub const ACCOUNT_HEADER: &str = "mechanism,eps,delta,n,param_name,param_value";
pub const DPSA_MAGIC: &[u8; 5] = b"DPSA1";

/// Formats like C's `%.10g`, independent of locale.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..10).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip_zeros(mantissa), exp.abs())
    } else {
        strip_zeros(&format!("{x:.*}", (9 - exp) as usize)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One row of a sweep or ablation table.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub eps: f64,
    pub delta: f64,
    /// Calibrated mechanism parameter (μ or σ̄) for sweeps, the swept value
    /// (N or m) for ablations; `None` when calibration was infeasible.
    pub param: Option<f64>,
    pub err_mean: f64,
    pub err_stderr: f64,
    pub trials: usize,
    /// Mean wall time per trial.
    pub runtime_ms: f64,
}

impl CurveRow {
    pub fn infeasible(eps: f64, delta: f64) -> Self {
        CurveRow {
            eps,
            delta,
            param: None,
            err_mean: f64::NAN,
            err_stderr: f64::NAN,
            trials: 0,
            runtime_ms: 0.0,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.param.is_some()
    }
}

pub fn write_curve_csv<W: Write>(rows: &[CurveRow], mut w: W) -> io::Result<()> {
    writeln!(w, "{CURVE_HEADER}")?;
    for r in rows {
        let param = r.param.map_or_else(|| "infeasible".to_string(), fmt_sig);
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            fmt_sig(r.eps),
            fmt_sig(r.delta),
            param,
            fmt_sig(r.err_mean),
            fmt_sig(r.err_stderr),
            r.trials,
            fmt_sig(r.runtime_ms)
        )?;
    }
    w.flush()
}

pub fn curve_csv_string(rows: &[CurveRow]) -> String {
    let mut buf = Vec::new();
    write_curve_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ASCII output")
}

pub fn emit_csv(rows: &[CurveRow], path: &Path) -> io::Result<()> {
    let file = std::fs::File::create(path)?;
    write_curve_csv(rows, io::BufWriter::new(file))
}

pub fn parse_curve_csv(text: &str) -> Result<Vec<CurveRow>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CURVE_HEADER => {}
        other => return Err(format!("unexpected header {other:?}")),
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                return Err(format!("line {}: expected 7 fields", i + 2));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| format!("line {}: bad number `{s}`", i + 2));
            Ok(CurveRow {
                eps: num(f[0])?,
                delta: num(f[1])?,
                param: if f[2] == "infeasible" { None } else { Some(num(f[2])?) },
                err_mean: num(f[3])?,
                err_stderr: num(f[4])?,
                trials: f[5].parse().map_err(|_| format!("line {}: bad trial count", i + 2))?,
                runtime_ms: num(f[6])?,
            })
        })
        .collect()
}

/// `mechanism,eps,delta,n,param_name,param_value`; a `None` value prints as
/// `infeasible`.
#[derive(Debug, Clone, PartialEq)]
pub struct AccountRow {
    pub mechanism: &'static str,
    pub eps: f64,
    pub delta: f64,
    pub n: usize,
    pub param_name: &'static str,
    pub param_value: Option<f64>,
}

pub fn write_account_csv<W: Write>(rows: &[AccountRow], mut w: W) -> io::Result<()> {
    writeln!(w, "{ACCOUNT_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.mechanism,
            fmt_sig(r.eps),
            fmt_sig(r.delta),
            r.n,
            r.param_name,
            r.param_value.map_or_else(|| "infeasible".to_string(), fmt_sig)
        )?;
    }
    w.flush()
}

/// `index,eigenvalue` rows (descending, 1-based) followed by a summary
/// comment with the eigengap at `k`.
pub fn write_spectrum_csv<W: Write>(spec: &SpectrumSummary, mut w: W) -> io::Result<()> {
    writeln!(w, "index,eigenvalue")?;
    for (i, v) in spec.values().iter().enumerate() {
        writeln!(w, "{},{}", i + 1, fmt_sig(*v))?;
    }
    writeln!(
        w,
        "# k={},delta_k={},normalized_gap={}",
        spec.k(),
        fmt_sig(spec.gap()),
        fmt_sig(spec.normalized_gap())
    )?;
    w.flush()
}

/// `DPSA1`, rows and cols as little-endian u64, then row-major
/// little-endian f64 entries.
pub fn write_dense_matrix<W: Write>(m: &DMatrix<f64>, mut w: W) -> io::Result<()> {
    w.write_all(DPSA_MAGIC)?;
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    w.write_all(&(m.ncols() as u64).to_le_bytes())?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            w.write_all(&m[(i, j)].to_le_bytes())?;
        }
    }
    w.flush()
}

pub fn read_dense_matrix<R: Read>(mut r: R) -> io::Result<DMatrix<f64>> {
    let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)?;
    if &magic != DPSA_MAGIC {
        return Err(bad("missing DPSA1 magic"));
    }
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let rows = usize::try_from(u64::from_le_bytes(word)).map_err(|_| bad("row count overflow"))?;
    r.read_exact(&mut word)?;
    let cols = usize::try_from(u64::from_le_bytes(word)).map_err(|_| bad("column count overflow"))?;
    let len = rows.checked_mul(cols).ok_or_else(|| bad("matrix too large"))?;
    let mut data = Vec::with_capacity(len);
    for _ in 0..len {
        r.read_exact(&mut word)?;
        data.push(f64::from_le_bytes(word));
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(bad("trailing bytes after matrix"));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}
