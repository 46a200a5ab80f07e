use std::fmt::Write;

use super::MilpModel;

const TERMS_PER_LINE: usize = 8;
const NAMES_PER_LINE: usize = 8;

fn fmt_num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn write_terms(out: &mut String, model: &MilpModel, terms: &[(usize, f64)]) {
    if terms.is_empty() {
        out.push_str("0 c_max");
        return;
    }
    for (pos, &(v, a)) in terms.iter().enumerate() {
        if pos > 0 && pos % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let name = &model.variables[v].name;
        let sign = if a < 0.0 { "-" } else { "+" };
        let mag = a.abs();
        if pos == 0 {
            if a < 0.0 {
                out.push_str("- ");
            }
        } else {
            let _ = write!(out, " {sign} ");
        }
        if mag == 1.0 {
            out.push_str(name);
        } else {
            let _ = write!(out, "{} {name}", fmt_num(mag));
        }
    }
}

/// Writes the model in LP file format. The output depends only on the
/// model, so it is byte-identical across calls.
pub fn serialize_lp(model: &MilpModel) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "\\ milq time-indexed model ({}): {} variables, {} constraints",
        model.mode, model.stats.num_variables, model.stats.num_constraints
    );
    out.push_str("Minimize\n obj: ");
    write_terms(&mut out, model, &model.objective);
    out.push_str("\nSubject To\n");
    for c in &model.constraints {
        let _ = write!(out, " {}: ", c.name);
        write_terms(&mut out, model, &c.terms);
        let _ = writeln!(out, " {} {}", c.sense.symbol(), fmt_num(c.rhs));
    }
    out.push_str("Bounds\n");
    for v in &model.variables {
        match v.upper {
            Some(u) if u == 0.0 => {
                let _ = writeln!(out, " {} = 0", v.name);
            }
            Some(u) => {
                let _ = writeln!(out, " 0 <= {} <= {}", v.name, fmt_num(u));
            }
            None => {}
        }
    }
    let binaries: Vec<&str> = model
        .variables
        .iter()
        .filter(|v| v.family.is_binary())
        .map(|v| v.name.as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for chunk in binaries.chunks(NAMES_PER_LINE) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}
