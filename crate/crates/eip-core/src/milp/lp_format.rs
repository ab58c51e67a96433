//! Model dump in LP text format for cross-checking against external solvers.

use super::{MipModel, Relation, VarKind};
use std::io::{self, Write};

/// Writes the model in LP format: objective, constraints, bounds and a
/// `Binary` section. Numerals use shortest round-trip formatting, so the
/// dump carries full precision.
pub fn write_lp<W: Write>(model: &MipModel, out: &mut W) -> io::Result<()> {
    writeln!(out, "\\ {}", model.name)?;
    writeln!(out, "Minimize")?;
    let mut obj = String::from(" obj:");
    if model.objective().is_empty() && model.objective_offset() == 0.0 {
        obj.push_str(" 0");
    }
    for &(var, coeff) in model.objective() {
        push_term(&mut obj, coeff, &model.variables()[var.index()].name);
    }
    if model.objective_offset() != 0.0 {
        push_const(&mut obj, model.objective_offset());
    }
    writeln!(out, "{obj}")?;

    writeln!(out, "Subject To")?;
    for c in model.constraints() {
        let mut line = format!(" {}:", sanitize(&c.name));
        if c.terms.is_empty() {
            line.push_str(" 0");
        }
        for &(var, coeff) in &c.terms {
            push_term(&mut line, coeff, &model.variables()[var.index()].name);
        }
        let rel = match c.relation {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        };
        line.push_str(&format!(" {} {}", rel, c.rhs));
        writeln!(out, "{line}")?;
    }

    writeln!(out, "Bounds")?;
    for v in model.variables() {
        let name = sanitize(&v.name);
        match (v.lower.is_finite(), v.upper.is_finite()) {
            (true, true) if v.lower == v.upper => writeln!(out, " {} = {}", name, v.lower)?,
            (true, true) => writeln!(out, " {} <= {} <= {}", v.lower, name, v.upper)?,
            (true, false) => writeln!(out, " {} >= {}", name, v.lower)?,
            (false, true) => writeln!(out, " {} <= {}", name, v.upper)?,
            (false, false) => writeln!(out, " {} free", name)?,
        }
    }

    if model.variables().iter().any(|v| v.kind == VarKind::Binary) {
        writeln!(out, "Binary")?;
        let mut line = String::new();
        for v in model.variables().iter().filter(|v| v.kind == VarKind::Binary) {
            if line.len() + v.name.len() + 1 > 72 {
                writeln!(out, " {line}")?;
                line.clear();
            }
            if !line.is_empty() {
                line.push(' ');
            }
            line.push_str(&sanitize(&v.name));
        }
        if !line.is_empty() {
            writeln!(out, " {line}")?;
        }
    }
    writeln!(out, "End")?;
    Ok(())
}

fn push_term(line: &mut String, coeff: f64, name: &str) {
    if coeff >= 0.0 {
        line.push_str(&format!(" + {} {}", coeff, sanitize(name)));
    } else {
        line.push_str(&format!(" - {} {}", -coeff, sanitize(name)));
    }
}

fn push_const(line: &mut String, value: f64) {
    if value >= 0.0 {
        line.push_str(&format!(" + {}", value));
    } else {
        line.push_str(&format!(" - {}", -value));
    }
}

fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect()
}
