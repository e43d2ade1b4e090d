use thiserror::Error;

use super::{Clause, Cnf, Lit, VarKey, VarTable};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("line {0}: malformed header")]
    BadHeader(usize),
    #[error("line {line}: bad literal `{text}`")]
    BadLiteral { line: usize, text: String },
    #[error("literal {lit} exceeds declared variable count {vars}")]
    OutOfRange { lit: i64, vars: usize },
    #[error("last clause is not terminated by 0")]
    Unterminated,
}

/// DIMACS CNF with a `c <id> <name>` comment per variable before the header.
pub fn write_dimacs(cnf: &Cnf) -> String {
    let mut out = String::new();
    for v in cnf.vars.ids() {
        out.push_str(&format!("c {v} {}\n", cnf.vars.name(v)));
    }
    out.push_str(&format!("p cnf {} {}\n", cnf.vars.len(), cnf.clauses.len()));
    for c in &cnf.clauses {
        push_clause(&mut out, c);
    }
    out
}

pub(crate) fn push_clause(out: &mut String, c: &Clause) {
    for l in c.lits() {
        out.push_str(&l.to_string());
        out.push(' ');
    }
    out.push_str("0\n");
}

/// Read DIMACS CNF; variables become [`VarKey::Input`] with id = DIMACS index.
pub fn parse_dimacs(text: &str) -> Result<Cnf, DimacsError> {
    let mut vars = None;
    let mut clauses = Vec::new();
    let mut cur: Vec<Lit> = Vec::new();
    for (lno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks.as_slice() {
                ["p", "cnf", v, _c] => {
                    vars = Some(v.parse::<usize>().map_err(|_| DimacsError::BadHeader(lno + 1))?);
                }
                _ => return Err(DimacsError::BadHeader(lno + 1)),
            }
            continue;
        }
        let nv = vars.ok_or(DimacsError::MissingHeader)?;
        for tok in line.split_whitespace() {
            let v: i64 = tok
                .parse()
                .map_err(|_| DimacsError::BadLiteral { line: lno + 1, text: tok.to_string() })?;
            if v == 0 {
                clauses.extend(Clause::new(std::mem::take(&mut cur)));
            } else if v.unsigned_abs() as usize > nv {
                return Err(DimacsError::OutOfRange { lit: v, vars: nv });
            } else {
                cur.push(Lit(v as i32));
            }
        }
    }
    let nv = vars.ok_or(DimacsError::MissingHeader)?;
    if !cur.is_empty() {
        return Err(DimacsError::Unterminated);
    }
    let mut table = VarTable::new();
    for i in 1..=nv {
        table.id(VarKey::Input(i));
    }
    Ok(Cnf::new(table, clauses))
}
