//! Reader for the LP-format subset written by the model exporter.

use std::collections::BTreeSet;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LpRow {
    pub name: String,
    pub terms: Vec<(f64, String)>,
    pub sense: String,
    pub rhs: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LpFile {
    pub objective: Vec<(f64, String)>,
    /// Coefficients as written inside the brackets (before the `/ 2`).
    pub quadratic: Vec<(f64, String, String)>,
    pub rows: Vec<LpRow>,
    pub bounds: Vec<(f64, String, f64)>,
    pub binaries: Vec<String>,
}

impl LpFile {
    pub fn variables(&self) -> BTreeSet<String> {
        let mut v: BTreeSet<String> = self.objective.iter().map(|t| t.1.clone()).collect();
        for (_, a, b) in &self.quadratic {
            v.insert(a.clone());
            v.insert(b.clone());
        }
        for r in &self.rows {
            v.extend(r.terms.iter().map(|t| t.1.clone()));
        }
        v.extend(self.bounds.iter().map(|b| b.1.clone()));
        v.extend(self.binaries.iter().cloned());
        v
    }
}

#[derive(PartialEq)]
enum Section {
    None,
    Objective,
    Rows,
    Bounds,
    Binary,
    End,
}

fn is_name(tok: &str) -> bool {
    tok.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
}

/// Parses `[+|-] [coef] name` sequences; `[ ... ] / 2` blocks go to `quad`.
fn parse_terms(
    toks: &[&str],
    lin: &mut Vec<(f64, String)>,
    quad: &mut Vec<(f64, String, String)>,
) -> Result<(), String> {
    let mut k = 0;
    let mut in_quad = false;
    while k < toks.len() {
        let mut sign = 1.0;
        match toks[k] {
            "[" => {
                in_quad = true;
                k += 1;
                continue;
            }
            "]" => {
                if toks.get(k + 1) != Some(&"/") || toks.get(k + 2) != Some(&"2") {
                    return Err("quadratic block must end with `] / 2`".into());
                }
                in_quad = false;
                k += 3;
                continue;
            }
            "+" => k += 1,
            "-" => {
                sign = -1.0;
                k += 1;
            }
            _ => {}
        }
        if toks.get(k) == Some(&"[") {
            continue;
        }
        let mut coef = 1.0;
        let tok = toks.get(k).ok_or("dangling sign")?;
        if !is_name(tok) {
            coef = tok.parse::<f64>().map_err(|_| format!("bad coefficient `{tok}`"))?;
            k += 1;
        }
        let name = toks.get(k).ok_or("missing variable")?.to_string();
        if !is_name(&name) {
            return Err(format!("bad variable `{name}`"));
        }
        k += 1;
        if in_quad {
            if toks.get(k) != Some(&"*") {
                return Err("quadratic term needs `*`".into());
            }
            let other = toks.get(k + 1).ok_or("missing second factor")?.to_string();
            k += 2;
            quad.push((sign * coef, name, other));
        } else {
            lin.push((sign * coef, name));
        }
    }
    if in_quad {
        return Err("unterminated quadratic block".into());
    }
    Ok(())
}

pub fn parse(text: &str) -> Result<LpFile, String> {
    let mut out = LpFile::default();
    let mut section = Section::None;
    let mut obj_toks: Vec<String> = Vec::new();
    let mut row_toks: Vec<String> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let head = line.trim();
        let next = match head {
            "Minimize" => Some(Section::Objective),
            "Subject To" => Some(Section::Rows),
            "Bounds" => Some(Section::Bounds),
            "Binary" => Some(Section::Binary),
            "End" => Some(Section::End),
            _ => None,
        };
        if let Some(s) = next {
            section = s;
            continue;
        }
        let toks = head.split_whitespace().map(str::to_string);
        match section {
            Section::Objective => obj_toks.extend(toks),
            Section::Rows => row_toks.extend(toks),
            Section::Bounds => {
                let t: Vec<&str> = head.split_whitespace().collect();
                if t.len() != 5 || t[1] != "<=" || t[3] != "<=" {
                    return Err(format!("line {}: bad bound `{head}`", ln + 1));
                }
                let lo = t[0].parse().map_err(|_| format!("line {}: bad bound", ln + 1))?;
                let hi = t[4].parse().map_err(|_| format!("line {}: bad bound", ln + 1))?;
                out.bounds.push((lo, t[2].to_string(), hi));
            }
            Section::Binary => out.binaries.extend(toks),
            Section::None if head.is_empty() => {}
            Section::None | Section::End => {
                if !head.is_empty() {
                    return Err(format!("line {}: text outside a section", ln + 1));
                }
            }
        }
    }
    if section != Section::End {
        return Err("missing End".into());
    }
    let obj: Vec<&str> = obj_toks.iter().map(String::as_str).collect();
    let body = match obj.first() {
        Some(&"obj:") => &obj[1..],
        _ => return Err("objective must be named `obj:`".into()),
    };
    parse_terms(body, &mut out.objective, &mut out.quadratic)?;

    let toks: Vec<&str> = row_toks.iter().map(String::as_str).collect();
    let mut k = 0;
    while k < toks.len() {
        let name = toks[k]
            .strip_suffix(':')
            .ok_or_else(|| format!("expected row name, got `{}`", toks[k]))?;
        k += 1;
        let start = k;
        while k < toks.len() && !matches!(toks[k], "<=" | ">=" | "=") {
            k += 1;
        }
        if k + 1 >= toks.len() {
            return Err(format!("row {name} has no sense or rhs"));
        }
        let mut terms = Vec::new();
        let mut quad = Vec::new();
        parse_terms(&toks[start..k], &mut terms, &mut quad)?;
        if !quad.is_empty() {
            return Err(format!("row {name} is quadratic"));
        }
        let rhs = toks[k + 1]
            .parse()
            .map_err(|_| format!("row {name}: bad rhs `{}`", toks[k + 1]))?;
        out.rows.push(LpRow {
            name: name.to_string(),
            terms,
            sense: toks[k].to_string(),
            rhs,
        });
        k += 2;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_file() {
        let text = "Minimize\n obj: 2 a - b\n   + [ 4 a * b ] / 2\nSubject To\n c1: a + 3 b\n   <= 4\n c2: - a >= -1\nBounds\n 0 <= b <= 1\nBinary\n a\nEnd\n";
        let f = parse(text).unwrap();
        assert_eq!(f.objective, vec![(2.0, "a".into()), (-1.0, "b".into())]);
        assert_eq!(f.quadratic, vec![(4.0, "a".into(), "b".into())]);
        assert_eq!(f.rows.len(), 2);
        assert_eq!(f.rows[0].terms, vec![(1.0, "a".into()), (3.0, "b".into())]);
        assert_eq!(f.rows[1].rhs, -1.0);
        assert_eq!(f.binaries, vec!["a".to_string()]);
    }

    #[test]
    fn rejects_missing_end() {
        assert!(parse("Minimize\n obj: a\nSubject To\n").is_err());
    }
}
