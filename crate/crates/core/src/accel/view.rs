use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::relcore::{aggregate, AggKind, DatabaseInstance, Mask, PreparedQuery, QuerySpec, TupleId};

/// Default cap on compiled view rows.
pub const DEFAULT_VIEW_CAP: usize = 10_000_000;

/// Every satisfying join combination of the full instance together with its
/// aggregate term, in canonical witness order.
///
/// Any mask selects a subset of these rows, and the masked aggregate is the
/// fold over that subset in row order, which is exactly what the join path
/// computes.
#[derive(Debug, Clone)]
pub struct CompiledView {
    kind: AggKind,
    arity: usize,
    witnesses: Vec<TupleId>,
    /// (relation, row) for each witness slot, parallel to `witnesses`
    locs: Vec<(u32, u32)>,
    terms: Vec<f64>,
}

impl CompiledView {
    pub fn kind(&self) -> AggKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn witness(&self, row: usize) -> &[TupleId] {
        &self.witnesses[row * self.arity..(row + 1) * self.arity]
    }

    pub fn term(&self, row: usize) -> f64 {
        self.terms[row]
    }

    pub fn terms(&self) -> &[f64] {
        &self.terms
    }

    /// Sub-view with the given rows, order preserved.
    pub fn select_rows(&self, rows: &[usize]) -> CompiledView {
        let a = self.arity;
        let mut out = CompiledView {
            kind: self.kind,
            arity: a,
            witnesses: Vec::with_capacity(rows.len() * a),
            locs: Vec::with_capacity(rows.len() * a),
            terms: Vec::with_capacity(rows.len()),
        };
        for &r in rows {
            out.witnesses.extend_from_slice(self.witness(r));
            out.locs.extend_from_slice(&self.locs[r * a..(r + 1) * a]);
            out.terms.push(self.terms[r]);
        }
        out
    }

    /// Projects rows onto player indices. `player_of` maps a tuple id to its
    /// player index, or `None` for exogenous tuples which are always present.
    pub fn bind_players(&self, player_of: impl Fn(TupleId) -> Option<u32>) -> PlayerView {
        let mut stride = 0;
        if !self.is_empty() {
            stride = self.witness(0).iter().filter(|&&id| player_of(id).is_some()).count();
        }
        let mut players = Vec::with_capacity(stride * self.len());
        for row in 0..self.len() {
            let before = players.len();
            players.extend(self.witness(row).iter().filter_map(|&id| player_of(id)));
            debug_assert_eq!(players.len() - before, stride);
        }
        PlayerView {
            kind: self.kind,
            stride,
            players,
            terms: self.terms.clone(),
        }
    }
}

/// Builds the witness view over the full instance.
pub fn compile_view(query: &QuerySpec, db: &DatabaseInstance) -> Result<CompiledView> {
    compile_prepared(&PreparedQuery::new(query, db)?, db, DEFAULT_VIEW_CAP)
}

pub fn compile_prepared(prepared: &PreparedQuery, db: &DatabaseInstance, cap: usize) -> Result<CompiledView> {
    let combos = prepared.combinations(db, &Mask::full(db));
    if combos.len() > cap {
        return Err(Error::Cap(format!(
            "compiled view has {} rows, over the cap of {cap}; use the naive evaluator",
            combos.len()
        )));
    }
    let locs = combos
        .witnesses
        .iter()
        .map(|&id| {
            let l = db.locate(id).expect("witness ids exist");
            (l.relation as u32, l.row as u32)
        })
        .collect();
    Ok(CompiledView {
        kind: prepared.kind(),
        arity: combos.arity,
        witnesses: combos.witnesses,
        locs,
        terms: combos.terms,
    })
}

/// Aggregate over the rows whose every witness is present under `mask`.
pub fn eval_compiled(view: &CompiledView, mask: &Mask) -> f64 {
    let arity = view.arity;
    let present = (0..view.len()).filter(|&row| {
        view.locs[row * arity..(row + 1) * arity]
            .iter()
            .all(|&(rel, r)| mask.allows(rel as usize, r as usize))
    });
    aggregate(view.kind, present.map(|row| view.terms[row]))
}

/// A compiled view keyed by player index instead of tuple id.
#[derive(Debug, Clone)]
pub struct PlayerView {
    kind: AggKind,
    stride: usize,
    players: Vec<u32>,
    terms: Vec<f64>,
}

impl PlayerView {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Aggregate over rows whose players are all in `present`.
    pub fn eval(&self, present: &FixedBitSet) -> f64 {
        let s = self.stride;
        if s == 0 {
            return aggregate(self.kind, self.terms.iter().copied());
        }
        let rows = self
            .players
            .chunks_exact(s)
            .zip(&self.terms)
            .filter(|(w, _)| w.iter().all(|&p| present.contains(p as usize)))
            .map(|(_, &t)| t);
        aggregate(self.kind, rows)
    }
}
