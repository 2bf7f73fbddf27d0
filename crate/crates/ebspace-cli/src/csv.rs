//! CSV emission for time curves.

use std::io::Write;

use ebspace::tc::TcCurvePoint;

/// One output row: time, EOF estimate, EB flag, entanglement cost (or the
/// `n/a` sentinel), and the minimum partial-transpose evidence value.
#[derive(Clone, Debug)]
pub struct CurveRow {
    pub t: f64,
    pub eof: f64,
    pub eb: bool,
    pub ec: Option<f64>,
    pub evidence: f64,
}

impl From<&TcCurvePoint> for CurveRow {
    fn from(p: &TcCurvePoint) -> Self {
        CurveRow {
            t: p.t,
            eof: p.eof,
            eb: p.eb,
            ec: p.ec,
            evidence: p.evidence,
        }
    }
}

/// Twelve significant digits, deterministic.
pub fn sig12(x: f64) -> String {
    format!("{:.11e}", x)
}

/// Writes `t,eof,eb,ec,evidence` rows with LF line endings.
pub fn emit_csv<W: Write>(rows: &[CurveRow], sink: &mut W) -> std::io::Result<()> {
    sink.write_all(b"t,eof,eb,ec,evidence\n")?;
    for r in rows {
        let ec = match r.ec {
            Some(v) => sig12(v),
            None => "n/a".to_string(),
        };
        writeln!(
            sink,
            "{},{},{},{},{}",
            sig12(r.t),
            sig12(r.eof),
            r.eb,
            ec,
            sig12(r.evidence)
        )?;
    }
    Ok(())
}
