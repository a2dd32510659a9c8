//! Plain-text outputs: CSV tables with 17 significant digits, LF endings.

use std::io::{self, Write};

use crate::evolution::{EvolutionResult, TraceRow};
use crate::quantum::SpectrumResult;
use crate::space::Ultrafunction;

/// Fixed 17-significant-digit rendering used in every table.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Columns `node, weight, re, im`.
pub fn write_ultrafunction_csv(u: &Ultrafunction, out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "node,weight,re,im")?;
    let g = u.grid();
    for ((x, d), z) in g.nodes().iter().zip(g.weights()).zip(u.values()) {
        writeln!(out, "{},{},{},{}", fmt_f64(*x), fmt_f64(*d), fmt_f64(z.re), fmt_f64(z.im))?;
    }
    Ok(())
}

/// Columns `j, mu, st_group, residual`.
pub fn write_spectrum_csv(spec: &SpectrumResult, out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "j,mu,st_group,residual")?;
    for (j, (mu, r)) in spec.eigenvalues().iter().zip(spec.residuals()).enumerate() {
        writeln!(out, "{j},{},{},{}", fmt_f64(*mu), spec.group_of(j), fmt_f64(*r))?;
    }
    Ok(())
}

/// One row per `(t, node)`: columns `t, node, re, im`.
pub fn write_evolution_csv(result: &EvolutionResult, out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "t,node,re,im")?;
    for (t, u) in result.times.iter().zip(&result.states) {
        for (x, z) in u.grid().nodes().iter().zip(u.values()) {
            writeln!(out, "{},{},{},{}", fmt_f64(*t), fmt_f64(*x), fmt_f64(z.re), fmt_f64(z.im))?;
        }
    }
    Ok(())
}

/// Columns `t, norm, energy, integral` (real part of `∮u`).
pub fn write_traces_csv(rows: &[TraceRow], out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "t,norm,energy,integral")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(r.t),
            fmt_f64(r.norm),
            fmt_f64(r.energy),
            fmt_f64(r.integral.re)
        )?;
    }
    Ok(())
}

/// Level scan rows `m, h, alpha, value`.
pub fn write_level_scan_csv(rows: &[(i32, f64)], out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "m,h,alpha,value")?;
    for &(m, v) in rows {
        writeln!(
            out,
            "{m},{},{},{}",
            fmt_f64(crate::levels::spacing(m)),
            fmt_f64(crate::levels::alpha(m)),
            fmt_f64(v)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{build_grid, embed_real};

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
        let back: f64 = fmt_f64(std::f64::consts::PI).parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn ultrafunction_table() {
        let g = build_grid(0, (0.0, 1.0), 0.0, &[]).unwrap();
        let u = embed_real(&g, |x| x);
        let mut buf = Vec::new();
        write_ultrafunction_csv(&u, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "node,weight,re,im");
        assert_eq!(lines.len(), g.dim() + 1);
        assert!(!text.contains('\r'));
    }
}
