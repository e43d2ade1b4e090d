//! A small DPLL solver (watched literals, chronological backtracking, no
//! learning) and the counting / acceptance drivers built on it.
//!
//! Branching always picks the lowest unassigned variable, true first. The
//! encoder gives `e_a` the lowest ids, so the search is effectively over
//! candidate extensions and everything else follows by propagation.

use std::path::Path;
use std::process::Command;

use thiserror::Error;

use crate::af::{Af, Argument, Extension, Mode, SemanticsId};
use crate::encoder::{assert_acceptance, encode, EncodeError, Encoding};
use crate::formula::{Clause, Cnf, Lit, Qbf2, Quant};
use crate::kexpr::KExpr;

/// Projections wider than this are refused by [`enumerate_models`].
pub const MAX_PROJECTION: usize = 30;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("conflict budget of {0} exhausted")]
    ResourceLimit(u64),
    #[error("projection over {0} variables exceeds the limit of {MAX_PROJECTION}")]
    TooManyProjected(usize),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error("external solver: {0}")]
    External(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolverConfig {
    /// Maximum conflicts per solve call.
    pub conflict_budget: Option<u64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
}

impl std::ops::AddAssign for Stats {
    fn add_assign(&mut self, o: Stats) {
        self.decisions += o.decisions;
        self.propagations += o.propagations;
        self.conflicts += o.conflicts;
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    /// Indexed by variable id; entry 0 is unused. `None` when unsatisfiable.
    pub model: Option<Vec<bool>>,
    pub stats: Stats,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        self.model.is_some()
    }
}

fn idx(l: Lit) -> usize {
    2 * l.var() as usize + usize::from(!l.is_pos())
}

struct Level {
    trail_pos: usize,
    decision: Lit,
    flippable: bool,
}

pub struct Solver {
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    units: Vec<Lit>,
    has_empty: bool,
    assign: Vec<i8>,
    trail: Vec<Lit>,
    levels: Vec<Level>,
    qhead: usize,
    hint: usize,
    stats: Stats,
}

impl Solver {
    pub fn new(num_vars: usize) -> Self {
        Solver {
            num_vars,
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * num_vars + 2],
            units: Vec::new(),
            has_empty: false,
            assign: vec![0; num_vars + 1],
            trail: Vec::new(),
            levels: Vec::new(),
            qhead: 0,
            hint: 1,
            stats: Stats::default(),
        }
    }

    pub fn from_clauses<'a>(num_vars: usize, clauses: impl IntoIterator<Item = &'a Clause>) -> Self {
        let mut s = Solver::new(num_vars);
        for c in clauses {
            s.add_clause(c.lits());
        }
        s
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    pub fn add_clause(&mut self, lits: &[Lit]) {
        let mut lits = lits.to_vec();
        lits.sort_by_key(|l| (l.var(), !l.is_pos()));
        lits.dedup();
        if lits.windows(2).any(|w| w[0].var() == w[1].var()) {
            return;
        }
        assert!(lits.iter().all(|l| (l.var() as usize) <= self.num_vars), "literal out of range");
        match lits.len() {
            0 => self.has_empty = true,
            1 => self.units.push(lits[0]),
            _ => {
                let ci = self.clauses.len();
                self.watches[idx(lits[0])].push(ci);
                self.watches[idx(lits[1])].push(ci);
                self.clauses.push(lits);
            }
        }
    }

    fn value(&self, l: Lit) -> i8 {
        let v = self.assign[l.var() as usize];
        if l.is_pos() {
            v
        } else {
            -v
        }
    }

    fn enqueue(&mut self, l: Lit) {
        self.assign[l.var() as usize] = if l.is_pos() { 1 } else { -1 };
        self.trail.push(l);
    }

    fn undo_to(&mut self, pos: usize) {
        while self.trail.len() > pos {
            let l = self.trail.pop().unwrap();
            let v = l.var() as usize;
            self.assign[v] = 0;
            self.hint = self.hint.min(v);
        }
        self.qhead = self.qhead.min(pos);
    }

    /// Returns false on conflict.
    fn propagate(&mut self) -> bool {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let falsified = !p;
            let ws = std::mem::take(&mut self.watches[idx(falsified)]);
            let mut keep = Vec::with_capacity(ws.len());
            let mut conflict = false;
            let mut i = 0;
            while i < ws.len() {
                let ci = ws[i];
                i += 1;
                if conflict {
                    keep.push(ci);
                    continue;
                }
                let c = &mut self.clauses[ci];
                if c[0] == falsified {
                    c.swap(0, 1);
                }
                let first = c[0];
                let first_val = {
                    let v = self.assign[first.var() as usize];
                    if first.is_pos() {
                        v
                    } else {
                        -v
                    }
                };
                if first_val == 1 {
                    keep.push(ci);
                    continue;
                }
                let mut moved = false;
                for k in 2..c.len() {
                    let l = c[k];
                    let v = self.assign[l.var() as usize];
                    let lv = if l.is_pos() { v } else { -v };
                    if lv != -1 {
                        c.swap(1, k);
                        let nl = c[1];
                        self.watches[idx(nl)].push(ci);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                keep.push(ci);
                if first_val == -1 {
                    conflict = true;
                } else {
                    self.enqueue(first);
                }
            }
            self.watches[idx(falsified)] = keep;
            if conflict {
                return false;
            }
        }
        true
    }

    fn backtrack(&mut self) -> bool {
        while let Some(level) = self.levels.pop() {
            self.undo_to(level.trail_pos);
            if level.flippable {
                let pos = self.trail.len();
                self.levels.push(Level { trail_pos: pos, decision: !level.decision, flippable: false });
                self.enqueue(!level.decision);
                return true;
            }
        }
        false
    }

    /// Solve under `assumptions`; the model is indexed by variable id.
    pub fn solve(&mut self, assumptions: &[Lit], cfg: &SolverConfig) -> Result<Option<Vec<bool>>, SolverError> {
        self.levels.clear();
        self.undo_to(0);
        self.hint = 1;
        if self.has_empty {
            return Ok(None);
        }
        for u in self.units.clone() {
            match self.value(u) {
                1 => {}
                -1 => return Ok(None),
                _ => self.enqueue(u),
            }
        }
        if !self.propagate() {
            return Ok(None);
        }
        for &a in assumptions {
            match self.value(a) {
                1 => continue,
                -1 => return Ok(None),
                _ => {}
            }
            let pos = self.trail.len();
            self.levels.push(Level { trail_pos: pos, decision: a, flippable: false });
            self.enqueue(a);
            if !self.propagate() {
                return Ok(None);
            }
        }
        let mut conflicts = 0u64;
        loop {
            if !self.propagate() {
                self.stats.conflicts += 1;
                conflicts += 1;
                if let Some(b) = cfg.conflict_budget {
                    if conflicts > b {
                        return Err(SolverError::ResourceLimit(b));
                    }
                }
                if !self.backtrack() {
                    return Ok(None);
                }
                continue;
            }
            while self.hint <= self.num_vars && self.assign[self.hint] != 0 {
                self.hint += 1;
            }
            if self.hint > self.num_vars {
                let model = std::iter::once(false).chain(self.assign[1..].iter().map(|&v| v == 1)).collect();
                return Ok(Some(model));
            }
            self.stats.decisions += 1;
            let d = Lit::pos(self.hint as u32);
            let pos = self.trail.len();
            self.levels.push(Level { trail_pos: pos, decision: d, flippable: true });
            self.enqueue(d);
        }
    }
}

/// Decide `cnf` with the default configuration.
pub fn sat(cnf: &Cnf) -> Result<SolveResult, SolverError> {
    solve_cnf(cnf)
}

pub fn solve_cnf(cnf: &Cnf) -> Result<SolveResult, SolverError> {
    solve_cnf_with(cnf, &SolverConfig::default())
}

pub fn solve_cnf_with(cnf: &Cnf, cfg: &SolverConfig) -> Result<SolveResult, SolverError> {
    let mut s = Solver::from_clauses(cnf.vars.len(), &cnf.clauses);
    let model = s.solve(&[], cfg)?;
    Ok(SolveResult { model, stats: s.stats() })
}

/// Visit the full model found for each distinct assignment of `project`,
/// in search order. The callback returns false to stop.
fn for_each_projected(
    num_vars: usize,
    clauses: &[Clause],
    project: &[u32],
    cfg: &SolverConfig,
    mut f: impl FnMut(&[bool]) -> Result<bool, SolverError>,
) -> Result<Stats, SolverError> {
    if project.len() > MAX_PROJECTION {
        return Err(SolverError::TooManyProjected(project.len()));
    }
    let mut s = Solver::from_clauses(num_vars, clauses);
    while let Some(model) = s.solve(&[], cfg)? {
        if !f(&model)? {
            break;
        }
        let block: Vec<Lit> = project.iter().map(|&v| Lit::new(v, !model[v as usize])).collect();
        if block.is_empty() {
            break;
        }
        s.add_clause(&block);
    }
    Ok(s.stats())
}

/// All assignments to `project` that extend to a model, as value vectors
/// aligned with `project`.
pub fn enumerate_models(cnf: &Cnf, project: &[u32], cfg: &SolverConfig) -> Result<Vec<Vec<bool>>, SolverError> {
    let mut out = Vec::new();
    for_each_projected(cnf.vars.len(), &cnf.clauses, project, cfg, |m| {
        out.push(project.iter().map(|&v| m[v as usize]).collect());
        Ok(true)
    })?;
    Ok(out)
}

/// Reusable checker for one 2QBF matrix with varying free-variable values.
pub struct QbfChecker<'a> {
    q: &'a Qbf2,
    complement: Solver,
    cfg: SolverConfig,
}

impl<'a> QbfChecker<'a> {
    pub fn new(q: &'a Qbf2, cfg: SolverConfig) -> Self {
        let n = q.vars.len();
        let complement = match q.quant {
            // ∀Y. D is false iff ¬D (a CNF of negated cubes) is satisfiable.
            Quant::Forall => {
                let neg: Vec<Clause> = q.dnf.iter().map(Clause::negated).collect();
                let mut s = Solver::from_clauses(n, &neg);
                if !q.dnf_present {
                    // No DNF part: the matrix is the CNF part alone.
                    s.add_clause(&[]);
                }
                s
            }
            Quant::Exists => Solver::from_clauses(n, &q.cnf),
        };
        QbfChecker { q, complement, cfg }
    }

    /// Does the formula hold under the free-variable assignment `candidate`?
    pub fn check(&mut self, candidate: &[Lit]) -> Result<bool, SolverError> {
        let mut values = vec![0i8; self.q.vars.len() + 1];
        for l in candidate {
            values[l.var() as usize] = if l.is_pos() { 1 } else { -1 };
        }
        let lit_true = |l: &Lit| {
            let v = values[l.var() as usize];
            (if l.is_pos() { v } else { -v }) == 1
        };
        match self.q.quant {
            Quant::Forall => {
                // A CNF clause survives every universal choice only through a true free literal.
                if !self.q.cnf.iter().all(|c| c.lits().iter().any(lit_true)) {
                    return Ok(false);
                }
                if !self.q.dnf_present {
                    return Ok(true);
                }
                Ok(self.complement.solve(candidate, &self.cfg)?.is_none())
            }
            Quant::Exists => {
                if !self.q.dnf_present {
                    return Ok(self.complement.solve(candidate, &self.cfg)?.is_some());
                }
                for cube in &self.q.dnf {
                    let mut assume = candidate.to_vec();
                    assume.extend_from_slice(cube.lits());
                    if self.complement.solve(&assume, &self.cfg)?.is_some() {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    pub fn stats(&self) -> Stats {
        self.complement.stats()
    }
}

/// One-shot 2QBF check.
pub fn check_2qbf(q: &Qbf2, candidate: &[Lit], cfg: &SolverConfig) -> Result<bool, SolverError> {
    QbfChecker::new(q, *cfg).check(candidate)
}

fn free_lits(free: &[u32], model: &[bool]) -> Vec<Lit> {
    free.iter().map(|&v| Lit::new(v, model[v as usize])).collect()
}

/// Visit every σ-extension model of the encoding (for second-level
/// semantics, every outer model that passes the universal check).
fn for_each_extension(
    enc: &Encoding,
    cfg: &SolverConfig,
    mut f: impl FnMut(&[bool]) -> bool,
) -> Result<Stats, SolverError> {
    let n = enc.vars.len();
    match enc.qbf() {
        None => for_each_projected(n, &enc.clauses, &enc.extension_vars, cfg, |m| Ok(f(m))),
        Some(q) => {
            let mut checker = QbfChecker::new(&q, *cfg);
            let mut stats = for_each_projected(n, &enc.clauses, &enc.extension_vars, cfg, |m| {
                if checker.check(&free_lits(&q.free, m))? {
                    Ok(f(m))
                } else {
                    Ok(true)
                }
            })?;
            stats += checker.stats();
            Ok(stats)
        }
    }
}

/// All extensions, in ascending bitset order.
pub fn extensions(enc: &Encoding, cfg: &SolverConfig) -> Result<Vec<Extension>, SolverError> {
    let mut out = Vec::new();
    for_each_extension(enc, cfg, |m| {
        out.push(enc.extension_of(m));
        true
    })?;
    out.sort();
    Ok(out)
}

pub fn count_extensions(enc: &Encoding, cfg: &SolverConfig) -> Result<u64, SolverError> {
    let mut n = 0;
    for_each_extension(enc, cfg, |_| {
        n += 1;
        true
    })?;
    Ok(n)
}

/// Whether some extension exists, with the skeptical flip applied.
pub fn answer(enc: &Encoding, cfg: &SolverConfig) -> Result<bool, SolverError> {
    let mut found = false;
    for_each_extension(enc, cfg, |_| {
        found = true;
        false
    })?;
    Ok(found != enc.flip)
}

pub fn count(af: &Af, x: &KExpr, sigma: SemanticsId, cfg: &SolverConfig) -> Result<u64, SolverError> {
    count_extensions(&encode(af, x, sigma)?, cfg)
}

/// Credulous or skeptical acceptance of `a`. Credulous preferred acceptance
/// coincides with credulous admissible acceptance and is decided that way.
pub fn decide(
    af: &Af,
    x: &KExpr,
    sigma: SemanticsId,
    a: &Argument,
    mode: Mode,
    cfg: &SolverConfig,
) -> Result<bool, SolverError> {
    let sigma = match (sigma, mode) {
        (SemanticsId::Preferred, Mode::Credulous) => SemanticsId::Admissible,
        _ => sigma,
    };
    let enc = assert_acceptance(&encode(af, x, sigma)?, a, mode)?;
    answer(&enc, cfg)
}

/// Run an external DIMACS solver: `cmd` is split on whitespace and the CNF
/// path is appended. Exit code 10 means SAT (model read from `v` lines),
/// 20 means UNSAT.
pub fn external_solve(cnf_path: &Path, cmd: &str) -> Result<SolveResult, SolverError> {
    let mut parts = cmd.split_whitespace();
    let prog = parts.next().ok_or_else(|| SolverError::External("empty command".into()))?;
    let out = Command::new(prog)
        .args(parts)
        .arg(cnf_path)
        .output()
        .map_err(|e| SolverError::External(format!("cannot run `{prog}`: {e}")))?;
    match out.status.code() {
        Some(10) => {
            let text = String::from_utf8_lossy(&out.stdout);
            let mut lits = Vec::new();
            for line in text.lines().filter(|l| l.starts_with('v')) {
                for tok in line[1..].split_whitespace() {
                    let v: i64 = tok.parse().map_err(|_| SolverError::External(format!("bad model token `{tok}`")))?;
                    if v != 0 {
                        lits.push(v);
                    }
                }
            }
            let n = lits.iter().map(|l| l.unsigned_abs() as usize).max().unwrap_or(0);
            let mut model = vec![false; n + 1];
            for l in lits {
                model[l.unsigned_abs() as usize] = l > 0;
            }
            Ok(SolveResult { model: Some(model), stats: Stats::default() })
        }
        Some(20) => Ok(SolveResult { model: None, stats: Stats::default() }),
        code => Err(SolverError::External(format!("unexpected exit status {code:?}"))),
    }
}
