//! CPLEX LP file export and a small reader for the same dialect.

use std::fmt::Write as _;

use super::model::{LpModel, Sense};
use crate::error::{Error, Result};

const TERMS_PER_LINE: usize = 8;

fn number(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

fn write_terms(out: &mut String, model: &LpModel, terms: &[(usize, f64)]) {
    if terms.is_empty() {
        if let Some(v) = model.vars().first() {
            let _ = write!(out, " 0 {}", v.name);
        }
        return;
    }
    for (i, &(j, a)) in terms.iter().enumerate() {
        if i > 0 && i % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if a < 0.0 { '-' } else { '+' };
        if i == 0 && sign == '+' {
            let _ = write!(out, " {} {}", number(a), model.vars()[j].name);
        } else {
            let _ = write!(out, " {sign} {} {}", number(a.abs()), model.vars()[j].name);
        }
    }
}

/// Renders `model` in CPLEX LP format. With `integrality`, every column is
/// declared binary (bounds [0,1]) or general integer.
pub fn export_model(model: &LpModel, integrality: bool) -> String {
    let mut out = String::new();
    out.push_str(if model.is_maximize() { "Maximize\n" } else { "Minimize\n" });
    out.push_str(" obj:");
    let obj: Vec<(usize, f64)> =
        model.objective().iter().enumerate().filter(|(_, &c)| c != 0.0).map(|(j, &c)| (j, c)).collect();
    write_terms(&mut out, model, &obj);
    out.push_str("\nSubject To\n");
    for row in model.constraints() {
        let _ = write!(out, " {}:", row.name);
        write_terms(&mut out, model, &row.coefs);
        let _ = writeln!(out, " {} {}", row.sense.symbol(), number(row.rhs));
    }
    out.push_str("Bounds\n");
    for v in model.vars() {
        if v.lower == f64::NEG_INFINITY && v.upper == f64::INFINITY {
            let _ = writeln!(out, " {} free", v.name);
        } else if v.lower == v.upper {
            let _ = writeln!(out, " {} = {}", v.name, number(v.lower));
        } else {
            let _ = writeln!(out, " {} <= {} <= {}", number(v.lower), v.name, number(v.upper));
        }
    }
    let flagged: Vec<_> = model.vars().iter().filter(|v| integrality || v.integer).collect();
    let binary: Vec<_> = flagged.iter().filter(|v| v.lower == 0.0 && v.upper == 1.0).collect();
    let general: Vec<_> = flagged.iter().filter(|v| !(v.lower == 0.0 && v.upper == 1.0)).collect();
    for (header, list) in [("Binary", binary), ("General", general)] {
        if list.is_empty() {
            continue;
        }
        let _ = writeln!(out, "{header}");
        for chunk in list.chunks(TERMS_PER_LINE) {
            let names: Vec<&str> = chunk.iter().map(|v| v.name.as_str()).collect();
            let _ = writeln!(out, " {}", names.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Colon,
    Plus,
    Minus,
    Cmp(Sense),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Objective,
    Constraints,
    Bounds,
    Binary,
    General,
    End,
}

fn section_header(line: &str) -> Option<(Section, Option<bool>)> {
    let lower = line.trim().to_ascii_lowercase();
    let words: Vec<&str> = lower.split_whitespace().collect();
    let joined = words.join(" ");
    match joined.as_str() {
        "maximize" | "maximise" | "maximum" | "max" => Some((Section::Objective, Some(true))),
        "minimize" | "minimise" | "minimum" | "min" => Some((Section::Objective, Some(false))),
        "subject to" | "such that" | "st" | "s.t." => Some((Section::Constraints, None)),
        "bounds" | "bound" => Some((Section::Bounds, None)),
        "binary" | "binaries" | "bin" => Some((Section::Binary, None)),
        "general" | "generals" | "gen" => Some((Section::General, None)),
        "end" => Some((Section::End, None)),
        _ => None,
    }
}

fn is_ident_char(ch: char) -> bool {
    ch.is_ascii_alphanumeric() || "_.[]{}!\"#$%&()/,;?@'`|~".contains(ch)
}

fn tokenize(text: &str, line: usize) -> Result<Vec<Tok>> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let err = |msg: String| Error::LpParse { line, msg };
    while i < chars.len() {
        let ch = chars[i];
        match ch {
            c if c.is_whitespace() => i += 1,
            ':' => {
                toks.push(Tok::Colon);
                i += 1;
            }
            '+' => {
                toks.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                toks.push(Tok::Minus);
                i += 1;
            }
            '<' | '>' | '=' => {
                let next = chars.get(i + 1).copied();
                let (sense, len) = match (ch, next) {
                    ('<', Some('=')) | ('=', Some('<')) => (Sense::Le, 2),
                    ('>', Some('=')) | ('=', Some('>')) => (Sense::Ge, 2),
                    ('<', _) => (Sense::Le, 1),
                    ('>', _) => (Sense::Ge, 1),
                    _ => (Sense::Eq, 1),
                };
                toks.push(Tok::Cmp(sense));
                i += len;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let s: String = chars[start..i].iter().collect();
                toks.push(Tok::Num(s.parse().map_err(|_| err(format!("bad number {s:?}")))?));
            }
            c if is_ident_char(c) => {
                let start = i;
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                match word.to_ascii_lowercase().as_str() {
                    "inf" | "infinity" => toks.push(Tok::Num(f64::INFINITY)),
                    _ => toks.push(Tok::Ident(word)),
                }
            }
            other => return Err(err(format!("unexpected character {other:?}"))),
        }
    }
    Ok(toks)
}

/// Linear expression: returns (terms, constant-free) parsed from `toks[*pos..]`
/// until a comparison token or the end.
fn parse_expr(toks: &[(Tok, usize)], pos: &mut usize, model: &mut LpModel) -> Result<Vec<(usize, f64)>> {
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    while *pos < toks.len() {
        let (tok, line) = &toks[*pos];
        match tok {
            Tok::Cmp(_) => break,
            Tok::Plus => {}
            Tok::Minus => sign = -sign,
            Tok::Num(v) => coef = Some(coef.unwrap_or(1.0) * v),
            Tok::Ident(name) => {
                let j = var_for(model, name)?;
                terms.push((j, sign * coef.unwrap_or(1.0)));
                sign = 1.0;
                coef = None;
            }
            Tok::Colon => return Err(Error::LpParse { line: *line, msg: "unexpected ':'".into() }),
        }
        *pos += 1;
    }
    if coef.is_some_and(|c| c != 0.0) {
        let line = toks.get(pos.saturating_sub(1)).map_or(0, |t| t.1);
        return Err(Error::LpParse { line, msg: "constant terms are not supported".into() });
    }
    Ok(terms)
}

fn var_for(model: &mut LpModel, name: &str) -> Result<usize> {
    match model.var_index(name) {
        Some(j) => Ok(j),
        None => model.try_add_var(name, 0.0, f64::INFINITY),
    }
}

fn take_label(toks: &[(Tok, usize)], pos: &mut usize) -> Option<String> {
    if let (Some((Tok::Ident(name), _)), Some((Tok::Colon, _))) = (toks.get(*pos), toks.get(*pos + 1)) {
        *pos += 2;
        return Some(name.clone());
    }
    None
}

fn signed_number(toks: &[(Tok, usize)], pos: &mut usize) -> Option<f64> {
    let mut sign = 1.0;
    let mut i = *pos;
    loop {
        match toks.get(i) {
            Some((Tok::Minus, _)) => sign = -sign,
            Some((Tok::Plus, _)) => {}
            Some((Tok::Num(v), _)) => {
                *pos = i + 1;
                return Some(sign * v);
            }
            _ => return None,
        }
        i += 1;
    }
}

/// Parses CPLEX LP text produced by [`export_model`] or written by hand.
pub fn parse_lp(text: &str) -> Result<LpModel> {
    let mut section = Section::None;
    let mut maximize = true;
    let mut objective: Vec<(Tok, usize)> = Vec::new();
    let mut rows: Vec<(Tok, usize)> = Vec::new();
    let mut bounds: Vec<(Vec<Tok>, usize)> = Vec::new();
    let mut integer: Vec<(String, bool)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('\\').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        if let Some((next, sense)) = section_header(content) {
            section = next;
            if let Some(max) = sense {
                maximize = max;
            }
            continue;
        }
        let toks = tokenize(content, line)?;
        match section {
            Section::None => return Err(Error::LpParse { line, msg: "content before the objective section".into() }),
            Section::Objective => objective.extend(toks.into_iter().map(|t| (t, line))),
            Section::Constraints => rows.extend(toks.into_iter().map(|t| (t, line))),
            Section::Bounds => bounds.push((toks, line)),
            Section::Binary | Section::General => {
                for t in toks {
                    match t {
                        Tok::Ident(name) => integer.push((name, section == Section::Binary)),
                        _ => return Err(Error::LpParse { line, msg: "expected variable names".into() }),
                    }
                }
            }
            Section::End => return Err(Error::LpParse { line, msg: "content after End".into() }),
        }
    }

    let mut model = if maximize { LpModel::maximize() } else { LpModel::minimize() };

    let mut pos = 0;
    take_label(&objective, &mut pos);
    for (j, c) in parse_expr(&objective, &mut pos, &mut model)? {
        let current = model.objective()[j];
        model.set_objective(j, current + c);
    }
    if pos < objective.len() {
        return Err(Error::LpParse { line: objective[pos].1, msg: "comparison in objective".into() });
    }

    let mut pos = 0;
    let mut unnamed = 0;
    while pos < rows.len() {
        let line = rows[pos].1;
        let name = take_label(&rows, &mut pos).unwrap_or_else(|| {
            unnamed += 1;
            format!("R{unnamed}")
        });
        let coefs = parse_expr(&rows, &mut pos, &mut model)?;
        let Some((Tok::Cmp(sense), _)) = rows.get(pos) else {
            return Err(Error::LpParse { line, msg: format!("row {name} has no comparison") });
        };
        let sense = *sense;
        pos += 1;
        let rhs = signed_number(&rows, &mut pos)
            .ok_or_else(|| Error::LpParse { line, msg: format!("row {name} has no right-hand side") })?;
        model.add_constraint(name, coefs, sense, rhs);
    }

    for (toks, line) in bounds {
        apply_bound(&mut model, &toks, line)?;
    }
    for (name, binary) in integer {
        let j = var_for(&mut model, &name)?;
        model.set_integer(j, true);
        if binary {
            model.set_bounds(j, 0.0, 1.0);
        }
    }
    Ok(model)
}

fn apply_bound(model: &mut LpModel, toks: &[Tok], line: usize) -> Result<()> {
    let err = |msg: &str| Error::LpParse { line, msg: msg.to_string() };
    let pairs: Vec<(Tok, usize)> = toks.iter().cloned().map(|t| (t, line)).collect();
    let mut pos = 0;
    let lead = signed_number(&pairs, &mut pos);
    if let Some(lo) = lead {
        // lo <= x [<= hi]
        let Some((Tok::Cmp(first), _)) = pairs.get(pos) else { return Err(err("expected comparison")) };
        let first = *first;
        let Some((Tok::Ident(name), _)) = pairs.get(pos + 1) else { return Err(err("expected variable")) };
        let j = var_for(model, name)?;
        pos += 2;
        let (mut l, mut u) = (model.vars()[j].lower, model.vars()[j].upper);
        match first {
            Sense::Le => l = lo,
            Sense::Ge => u = lo,
            Sense::Eq => {
                l = lo;
                u = lo;
            }
        }
        if let Some((Tok::Cmp(second), _)) = pairs.get(pos) {
            let second = *second;
            pos += 1;
            let hi = signed_number(&pairs, &mut pos).ok_or_else(|| err("expected bound value"))?;
            match second {
                Sense::Le => u = hi,
                Sense::Ge => l = hi,
                Sense::Eq => return Err(err("double-sided bound with '='")),
            }
        }
        if pos != pairs.len() {
            return Err(err("trailing tokens in bound"));
        }
        model.set_bounds(j, l, u);
        return Ok(());
    }
    let Some((Tok::Ident(name), _)) = pairs.first() else { return Err(err("expected variable")) };
    let j = var_for(model, name)?;
    match pairs.get(1) {
        Some((Tok::Ident(word), _)) if word.eq_ignore_ascii_case("free") && pairs.len() == 2 => {
            model.set_bounds(j, f64::NEG_INFINITY, f64::INFINITY);
        }
        Some((Tok::Cmp(sense), _)) => {
            let sense = *sense;
            let mut pos = 2;
            let value = signed_number(&pairs, &mut pos).ok_or_else(|| err("expected bound value"))?;
            if pos != pairs.len() {
                return Err(err("trailing tokens in bound"));
            }
            let (l, u) = (model.vars()[j].lower, model.vars()[j].upper);
            match sense {
                Sense::Le => model.set_bounds(j, l, value),
                Sense::Ge => model.set_bounds(j, value, u),
                Sense::Eq => model.set_bounds(j, value, value),
            }
        }
        _ => return Err(err("unrecognized bound")),
    }
    Ok(())
}
