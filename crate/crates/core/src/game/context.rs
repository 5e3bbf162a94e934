use std::collections::HashMap;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::accel::{compile_prepared, CompiledView, PlayerView, DEFAULT_VIEW_CAP};
use crate::error::{Error, Result};
use crate::provenance::{lineage_of, EndogenousPartition};
use crate::relcore::{DatabaseInstance, Mask, PreparedQuery, QuerySpec, TupleId};

/// A set of players, encoded as a bit vector over the context's player order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coalition(FixedBitSet);

impl Coalition {
    pub fn empty(n: usize) -> Self {
        Coalition(FixedBitSet::with_capacity(n))
    }

    pub fn full(n: usize) -> Self {
        let mut b = FixedBitSet::with_capacity(n);
        b.insert_range(..);
        Coalition(b)
    }

    pub fn from_players(n: usize, players: impl IntoIterator<Item = usize>) -> Self {
        let mut c = Self::empty(n);
        for p in players {
            c.0.insert(p);
        }
        c
    }

    pub fn insert(&mut self, player: usize) {
        self.0.insert(player);
    }

    pub fn remove(&mut self, player: usize) {
        self.0.set(player, false);
    }

    pub fn contains(&self, player: usize) -> bool {
        self.0.contains(player)
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn players(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    pub fn bits(&self) -> &FixedBitSet {
        &self.0
    }

    pub fn clear(&mut self) {
        self.0.clear();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EvaluatorKind {
    #[default]
    Naive,
    Compiled,
}

impl std::str::FromStr for EvaluatorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(EvaluatorKind::Naive),
            "compiled" => Ok(EvaluatorKind::Compiled),
            _ => Err(Error::Config(format!("unknown evaluator {s:?}"))),
        }
    }
}

#[derive(Debug)]
enum Evaluator {
    Naive,
    Compiled(PlayerView),
}

/// Everything needed to evaluate v(S) for coalitions of endogenous tuples.
/// Read-only once built.
#[derive(Debug)]
pub struct GameContext {
    db: Arc<DatabaseInstance>,
    prepared: PreparedQuery,
    partition: EndogenousPartition,
    players: Vec<TupleId>,
    index: HashMap<TupleId, usize>,
    /// class index of each player
    class: Vec<usize>,
    /// local row of each player within its relation
    rows: Vec<usize>,
    view: Option<CompiledView>,
    evaluator: Evaluator,
    empty_value: f64,
}

impl GameContext {
    /// Players are the witness lineage of `query`.
    pub fn new(db: Arc<DatabaseInstance>, query: &QuerySpec, kind: EvaluatorKind) -> Result<Self> {
        let prepared = PreparedQuery::new(query, &db)?;
        let partition = lineage_of(&prepared, &db);
        Self::build(db, prepared, partition, kind, DEFAULT_VIEW_CAP)
    }

    /// Uses an explicit player partition. Every id must belong to its class's relation,
    /// and that relation must appear in the query.
    pub fn with_partition(
        db: Arc<DatabaseInstance>,
        query: &QuerySpec,
        partition: EndogenousPartition,
        kind: EvaluatorKind,
    ) -> Result<Self> {
        let prepared = PreparedQuery::new(query, &db)?;
        Self::build(db, prepared, partition, kind, DEFAULT_VIEW_CAP)
    }

    pub fn with_view_cap(
        db: Arc<DatabaseInstance>,
        query: &QuerySpec,
        kind: EvaluatorKind,
        view_cap: usize,
    ) -> Result<Self> {
        let prepared = PreparedQuery::new(query, &db)?;
        let partition = lineage_of(&prepared, &db);
        Self::build(db, prepared, partition, kind, view_cap)
    }

    fn build(
        db: Arc<DatabaseInstance>,
        prepared: PreparedQuery,
        partition: EndogenousPartition,
        kind: EvaluatorKind,
        view_cap: usize,
    ) -> Result<Self> {
        let mut players = Vec::new();
        let mut class = Vec::new();
        let mut rows = Vec::new();
        let mut index = HashMap::new();
        for (ci, c) in partition.classes.iter().enumerate() {
            if !prepared.relations().contains(&c.relation) {
                return Err(Error::Domain(format!(
                    "endogenous relation {} is not part of the query",
                    c.name
                )));
            }
            let rel = db.relation(c.relation);
            for &id in &c.ids {
                if !rel.contains(id) {
                    return Err(Error::Domain(format!(
                        "tuple {id} does not belong to relation {}",
                        rel.name
                    )));
                }
                if index.insert(id, players.len()).is_some() {
                    return Err(Error::Domain(format!("tuple {id} listed twice")));
                }
                players.push(id);
                class.push(ci);
                rows.push((id.0 - rel.first_id) as usize);
            }
        }
        let mut ctx = GameContext {
            db,
            prepared,
            partition,
            players,
            index,
            class,
            rows,
            view: None,
            evaluator: Evaluator::Naive,
            empty_value: 0.0,
        };
        if kind == EvaluatorKind::Compiled {
            let view = compile_prepared(&ctx.prepared, &ctx.db, view_cap)?;
            // Endogenous-relation tuples outside the player set can never be
            // present; rows that need one are dropped from the player view.
            let endo: Vec<usize> = ctx.partition.classes.iter().map(|c| c.relation).collect();
            let keep: Vec<usize> = (0..view.len())
                .filter(|&r| {
                    view.witness(r).iter().all(|&id| {
                        let loc = ctx.db.locate(id).expect("witness exists");
                        !endo.contains(&loc.relation) || ctx.index.contains_key(&id)
                    })
                })
                .collect();
            let pv = if keep.len() == view.len() {
                view.bind_players(|id| ctx.index.get(&id).map(|&p| p as u32))
            } else {
                view.select_rows(&keep)
                    .bind_players(|id| ctx.index.get(&id).map(|&p| p as u32))
            };
            ctx.evaluator = Evaluator::Compiled(pv);
            ctx.view = Some(view);
        }
        ctx.empty_value = ctx.value(&Coalition::empty(ctx.players.len()))?;
        Ok(ctx)
    }

    pub fn instance(&self) -> &DatabaseInstance {
        &self.db
    }

    pub fn instance_arc(&self) -> Arc<DatabaseInstance> {
        self.db.clone()
    }

    pub fn query(&self) -> &PreparedQuery {
        &self.prepared
    }

    pub fn partition(&self) -> &EndogenousPartition {
        &self.partition
    }

    pub fn view(&self) -> Option<&CompiledView> {
        self.view.as_ref()
    }

    pub fn evaluator_kind(&self) -> EvaluatorKind {
        match self.evaluator {
            Evaluator::Naive => EvaluatorKind::Naive,
            Evaluator::Compiled(_) => EvaluatorKind::Compiled,
        }
    }

    /// |N|
    pub fn n(&self) -> usize {
        self.players.len()
    }

    pub fn players(&self) -> &[TupleId] {
        &self.players
    }

    pub fn player_index(&self, t: TupleId) -> Option<usize> {
        self.index.get(&t).copied()
    }

    pub fn player_class(&self, player: usize) -> usize {
        self.class[player]
    }

    /// v(∅), evaluated once at construction.
    pub fn empty_value(&self) -> f64 {
        self.empty_value
    }

    /// v(N)
    pub fn full_value(&self) -> Result<f64> {
        self.value(&Coalition::full(self.n()))
    }

    pub fn coalition_of(&self, ids: impl IntoIterator<Item = TupleId>) -> Result<Coalition> {
        let mut c = Coalition::empty(self.n());
        for id in ids {
            let p = self
                .player_index(id)
                .ok_or_else(|| Error::Domain(format!("tuple {id} is not an endogenous player")))?;
            c.insert(p);
        }
        Ok(c)
    }

    pub fn ids_of(&self, s: &Coalition) -> Vec<TupleId> {
        s.players().map(|p| self.players[p]).collect()
    }

    /// Mask for `S ∪ exogenous`: endogenous relations are restricted to members of S.
    pub fn mask_for(&self, s: &Coalition) -> Mask {
        let mut mask = Mask::full(&self.db);
        let mut sets: Vec<FixedBitSet> = self
            .partition
            .classes
            .iter()
            .map(|c| FixedBitSet::with_capacity(self.db.relation(c.relation).len()))
            .collect();
        for p in s.players() {
            sets[self.class[p]].insert(self.rows[p]);
        }
        for (c, set) in self.partition.classes.iter().zip(sets) {
            mask.restrict_rows(c.relation, set);
        }
        mask
    }

    /// v(S) through the configured evaluator.
    pub fn value(&self, s: &Coalition) -> Result<f64> {
        if s.bits().len() != self.n() {
            return Err(Error::Domain(format!(
                "coalition width {} does not match {} players",
                s.bits().len(),
                self.n()
            )));
        }
        Ok(match &self.evaluator {
            Evaluator::Naive => self.prepared.evaluate(&self.db, &self.mask_for(s)),
            Evaluator::Compiled(pv) => pv.eval(s.bits()),
        })
    }
}
