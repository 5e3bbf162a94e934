use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relcore::{
    format_date, parse_date, relation_from_csv, Column, ColumnType, DatabaseInstance, QuerySpec,
    RelationDesc, SchemaDesc,
};

/// Row counts of the generated star: fact (lineitem), dim1 (orders), dim2 (customer).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scale {
    pub fact: usize,
    pub orders: usize,
    pub customers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub seed: u64,
    pub scale: Scale,
    /// Log-normal sigma of the price multiplier; 0 gives near-uniform terms.
    pub skew: f64,
    /// Select a single order (the first one) with a constant predicate, as in
    /// the revenue-of-one-order query. Without it the query covers every
    /// order of every AUTO customer.
    pub focus: bool,
}

impl GenSpec {
    pub fn new(seed: u64, scale: Scale, skew: f64) -> Self {
        GenSpec {
            seed,
            scale,
            skew,
            focus: true,
        }
    }
}

/// Named instances with fixed contents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Eight lineitems, two customers, three orders; revenue of order 23417.
    Example1,
    /// As `Example1`, with the four selected lineitems rewritten so that every
    /// one contributes the same term (450).
    Example1Const,
}

impl std::str::FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "example1" => Ok(Preset::Example1),
            "example1-const" => Ok(Preset::Example1Const),
            _ => Err(Error::Config(format!(
                "unknown preset {s:?} (expected example1 or example1-const)"
            ))),
        }
    }
}

/// A schema, its tables as CSV text, and a query, ready to load or write out.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedInstance {
    pub schema: SchemaDesc,
    /// (relation name, CSV text) in schema order.
    pub tables: Vec<(String, String)>,
    pub query: QuerySpec,
}

impl GeneratedInstance {
    pub fn instance(&self) -> Result<DatabaseInstance> {
        let rels = self
            .schema
            .relations
            .iter()
            .zip(&self.tables)
            .map(|(desc, (_, text))| relation_from_csv(desc, text))
            .collect::<Result<Vec<_>>>()?;
        DatabaseInstance::new(rels)
    }

    /// Writes `schema.json`, one CSV per relation and `query.json` into `dir`.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        let mut put = |name: &str, text: &str| -> Result<()> {
            let p = dir.join(name);
            std::fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
            written.push(p);
            Ok(())
        };
        put(
            "schema.json",
            &(serde_json::to_string_pretty(&self.schema)? + "\n"),
        )?;
        for (name, text) in &self.tables {
            put(&format!("{name}.csv"), text)?;
        }
        put("query.json", &(self.query.to_json() + "\n"))?;
        Ok(written)
    }
}

fn col(name: &str, ty: ColumnType) -> Column {
    Column {
        name: name.into(),
        ty,
    }
}

fn star_schema() -> SchemaDesc {
    use ColumnType::*;
    let rel = |name: &str, columns| RelationDesc {
        name: name.into(),
        columns,
        endogenous: true,
        file: None,
    };
    SchemaDesc {
        relations: vec![
            rel(
                "lineitem",
                vec![
                    col("orderkey", Integer),
                    col("extendedprice", Decimal),
                    col("discount", Decimal),
                    col("shipdate", Date),
                ],
            ),
            rel(
                "customer",
                vec![
                    col("custkey", Integer),
                    col("name", Text),
                    col("acctbal", Decimal),
                    col("mktsegment", Text),
                ],
            ),
            rel(
                "orders",
                vec![
                    col("orderkey", Integer),
                    col("custkey", Integer),
                    col("orderdate", Date),
                    col("shippriority", Integer),
                ],
            ),
        ],
    }
}

/// Revenue after discount of AUTO customers' lineitems shipped after their
/// order date, optionally restricted to one order.
fn star_query(order: Option<i64>) -> QuerySpec {
    let mut predicates = serde_json::json!([
        {"lhs": {"col": "c.mktsegment"}, "op": "=", "rhs": {"text": "AUTO"}},
        {"lhs": {"col": "l.shipdate"}, "op": ">", "rhs": {"col": "o.orderdate"}}
    ]);
    if let Some(k) = order {
        predicates
            .as_array_mut()
            .unwrap()
            .push(serde_json::json!({"lhs": {"col": "o.orderkey"}, "op": "=", "rhs": {"int": k}}));
    }
    let q = serde_json::json!({
        "relations": [
            {"name": "customer", "alias": "c"},
            {"name": "orders", "alias": "o"},
            {"name": "lineitem", "alias": "l"}
        ],
        "equijoins": [
            {"left": "c.custkey", "right": "o.custkey"},
            {"left": "l.orderkey", "right": "o.orderkey"}
        ],
        "predicates": predicates,
        "aggregate": {"sum": {"mul": [
            {"col": "l.extendedprice"},
            {"sub": [{"const": 1.0}, {"col": "l.discount"}]}
        ]}}
    });
    serde_json::from_value(q).expect("built-in query is well formed")
}

fn to_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

fn assemble(lineitem: Vec<Vec<String>>, customer: Vec<Vec<String>>, orders: Vec<Vec<String>>, focus: Option<i64>) -> GeneratedInstance {
    let schema = star_schema();
    let tables = [lineitem, customer, orders]
        .into_iter()
        .zip(&schema.relations)
        .map(|(rows, desc)| {
            let header: Vec<&str> = desc.columns.iter().map(|c| c.name.as_str()).collect();
            (desc.name.clone(), to_csv(&header, &rows))
        })
        .collect();
    GeneratedInstance {
        schema,
        tables,
        query: star_query(focus),
    }
}

fn strs<const N: usize>(xs: [&str; N]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

pub fn preset(p: Preset) -> GeneratedInstance {
    let mut lineitem = vec![
        strs(["23417", "500", "0.10", "1998-04-21"]),
        strs(["23417", "600", "0.01", "1998-04-16"]),
        strs(["23417", "700", "0.06", "1998-04-06"]),
        strs(["23417", "650", "0.05", "1998-03-25"]),
        strs(["23110", "820", "0.04", "1998-02-14"]),
        strs(["23110", "560", "0.03", "1998-02-17"]),
        strs(["22789", "400", "0.07", "1998-01-11"]),
        strs(["22789", "720", "0.06", "1998-01-15"]),
    ];
    if p == Preset::Example1Const {
        for row in &mut lineitem[..4] {
            row[1] = "500".into();
            row[2] = "0.10".into();
        }
    }
    let customer = vec![
        strs(["1456", "Cust1456", "6800", "AUTO"]),
        strs(["3125", "Cust3125", "4300", "MACHINERY"]),
    ];
    let orders = vec![
        strs(["23417", "1456", "1997-12-21", "0"]),
        strs(["23110", "3125", "1998-01-05", "1"]),
        strs(["22789", "3125", "1998-01-07", "0"]),
    ];
    assemble(lineitem, customer, orders, Some(23417))
}

const SEGMENTS: [&str; 5] = ["AUTO", "MACHINERY", "BUILDING", "HOUSEHOLD", "FURNITURE"];

fn money(x: f64) -> String {
    format!("{:.2}", x)
}

/// Deterministic random star instance.
///
/// The first customer is always AUTO and owns the first order, so the
/// focused query is never trivially empty unless the fact table is.
/// Lineitems pick their order uniformly; prices are `100·LogNormal(0, skew)`
/// rounded to cents, discounts 0.00–0.10, and ship dates fall between 30 days
/// before and 120 days after the order date.
pub fn gen_instance(spec: &GenSpec) -> Result<GeneratedInstance> {
    let Scale {
        fact,
        orders,
        customers,
    } = spec.scale;
    if orders == 0 || customers == 0 {
        return Err(Error::Config(
            "the generated star needs at least one order and one customer".into(),
        ));
    }
    if spec.skew.is_nan() || spec.skew < 0.0 || spec.skew.is_infinite() {
        return Err(Error::Config(format!("skew must be a finite value ≥ 0, got {}", spec.skew)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let price = LogNormal::new(0.0, spec.skew).map_err(|e| Error::Config(e.to_string()))?;
    let base_date = parse_date("1997-01-01").expect("valid date");

    let customer: Vec<Vec<String>> = (0..customers)
        .map(|i| {
            let seg = if i == 0 {
                "AUTO"
            } else {
                SEGMENTS[rng.gen_range(0..SEGMENTS.len())]
            };
            vec![
                (1000 + i).to_string(),
                format!("Cust{}", 1000 + i),
                money(rng.gen_range(-999.0..9999.0)),
                seg.to_string(),
            ]
        })
        .collect();

    let mut order_dates = Vec::with_capacity(orders);
    let orders_rows: Vec<Vec<String>> = (0..orders)
        .map(|i| {
            let cust = if i == 0 { 0 } else { rng.gen_range(0..customers) };
            let date = base_date + rng.gen_range(0..365);
            order_dates.push(date);
            vec![
                (20000 + i).to_string(),
                (1000 + cust).to_string(),
                format_date(date),
                rng.gen_range(0..2).to_string(),
            ]
        })
        .collect();

    let lineitem: Vec<Vec<String>> = (0..fact)
        .map(|_| {
            let o = rng.gen_range(0..orders);
            let p = (100.0 * price.sample(&mut rng)).max(0.01);
            let disc = rng.gen_range(0..=10) as f64 / 100.0;
            let ship = order_dates[o] + rng.gen_range(-30..=120);
            vec![
                (20000 + o).to_string(),
                money(p),
                format!("{disc:.2}"),
                format_date(ship),
            ]
        })
        .collect();

    Ok(assemble(
        lineitem,
        customer,
        orders_rows,
        spec.focus.then_some(20000),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_loads() {
        let g = preset(Preset::Example1);
        let db = g.instance().unwrap();
        assert_eq!(db.tuple_count(), 13);
        assert_eq!(db.relation(0).name, "lineitem");
    }

    #[test]
    fn deterministic() {
        let s = GenSpec::new(7, Scale { fact: 30, orders: 4, customers: 3 }, 2.0);
        assert_eq!(gen_instance(&s).unwrap(), gen_instance(&s).unwrap());
        let t = GenSpec { seed: 8, ..s.clone() };
        assert_ne!(gen_instance(&s).unwrap().tables, gen_instance(&t).unwrap().tables);
    }

    #[test]
    fn empty_fact_is_valid() {
        let s = GenSpec::new(1, Scale { fact: 0, orders: 2, customers: 2 }, 0.0);
        let g = gen_instance(&s).unwrap();
        assert_eq!(g.instance().unwrap().relation(0).len(), 0);
    }

    #[test]
    fn rejects_bad_scale() {
        let s = GenSpec::new(1, Scale { fact: 3, orders: 0, customers: 2 }, 0.0);
        assert!(gen_instance(&s).is_err());
        let s = GenSpec::new(1, Scale { fact: 3, orders: 1, customers: 1 }, -1.0);
        assert!(gen_instance(&s).is_err());
    }
}
