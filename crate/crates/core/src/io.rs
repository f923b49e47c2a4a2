//! Instance files and formulation emission (CPLEX LP, fixed MPS, JSON).

use std::fmt::Write as _;
use std::path::Path;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::formulation::{Block, Formulation, Row, RowTag, Sense, SizeInfo, Variable};
use crate::instance::{GraphHint, ProblemInstance};
use crate::linalg::IntMatrix;
use crate::modularity::ModularityProfile;
use crate::pipeline::EfArtifact;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Lp,
    Mps,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lp" => Ok(Format::Lp),
            "mps" => Ok(Format::Mps),
            "json" => Ok(Format::Json),
            other => Err(Error::Parse(format!("unknown format `{other}` (expected lp, mps or json)"))),
        }
    }
}

fn int_field(v: &Value, what: &str) -> Result<BigInt> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigInt::from(i))
            } else if let Some(u) = n.as_u64() {
                Ok(BigInt::from(u))
            } else {
                Err(Error::Parse(format!("{what}: `{n}` is not an integer")))
            }
        }
        Value::String(s) => s.trim().parse().map_err(|_| Error::Parse(format!("{what}: `{s}` is not an integer"))),
        other => Err(Error::Parse(format!("{what}: expected an integer, found {other}"))),
    }
}

fn usize_field(v: &Value, what: &str) -> Result<usize> {
    v.as_u64().map(|u| u as usize).ok_or_else(|| Error::Parse(format!("{what}: expected a nonnegative integer")))
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| Error::Parse(format!("{what}: expected a list")))
}

/// Parses an instance document; `default_label` is used when `"label"` is absent.
pub fn parse_instance_str(text: &str, default_label: &str) -> Result<ProblemInstance> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    let obj = doc.as_object().ok_or_else(|| Error::Parse("top level must be an object".into()))?;
    let rows = array(obj.get("A").ok_or_else(|| Error::Parse("missing field \"A\"".into()))?, "A")?;
    if rows.is_empty() {
        return Err(Error::Parse("A: no rows".into()));
    }
    let mut a_rows: Vec<Vec<BigInt>> = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let entries = array(row, &format!("A row {i}"))?;
        let parsed = entries.iter().enumerate().map(|(j, v)| int_field(v, &format!("A[{i}][{j}]"))).collect::<Result<Vec<_>>>()?;
        if let Some(first) = a_rows.first() {
            if parsed.len() != first.len() {
                return Err(Error::Parse(format!("A row {i} has {} entries, row 0 has {}", parsed.len(), first.len())));
            }
        }
        a_rows.push(parsed);
    }
    let cols = a_rows[0].len();
    let b = array(obj.get("b").ok_or_else(|| Error::Parse("missing field \"b\"".into()))?, "b")?
        .iter()
        .enumerate()
        .map(|(i, v)| int_field(v, &format!("b[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    if b.len() != a_rows.len() {
        return Err(Error::DimensionMismatch(format!("b has {} entries, A has {} rows", b.len(), a_rows.len())));
    }
    let label = match obj.get("label") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(Error::Parse("label: expected a string".into())),
        None => default_label.to_string(),
    };
    let mut inst = ProblemInstance::new(IntMatrix::from_big_rows(a_rows, cols)?, b, label)?;
    if let Some(h) = obj.get("graph_hint") {
        let nodes = usize_field(h.get("nodes").unwrap_or(&Value::Null), "graph_hint.nodes")?;
        let arcs = array(h.get("arcs").unwrap_or(&Value::Null), "graph_hint.arcs")?
            .iter()
            .enumerate()
            .map(|(k, arc)| {
                let pair = array(arc, &format!("graph_hint.arcs[{k}]"))?;
                if pair.len() != 2 {
                    return Err(Error::Parse(format!("graph_hint.arcs[{k}]: expected [tail, head]")));
                }
                Ok((usize_field(&pair[0], "arc tail")?, usize_field(&pair[1], "arc head")?))
            })
            .collect::<Result<Vec<_>>>()?;
        let column_map = match h.get("column_map") {
            Some(v) => array(v, "graph_hint.column_map")?.iter().map(|x| usize_field(x, "graph_hint.column_map")).collect::<Result<Vec<_>>>()?,
            None => (0..arcs.len()).collect(),
        };
        if arcs.iter().any(|&(t, h)| t >= nodes || h >= nodes) {
            return Err(Error::Parse(format!("graph_hint: arc endpoint outside 0..{nodes}")));
        }
        inst = inst.with_hint(GraphHint { nodes, arcs, column_map });
    }
    if let Some(p) = obj.get("trusted_profile") {
        let delta = int_field(p.get("delta").unwrap_or(&Value::Null), "trusted_profile.delta")?;
        let gcd = int_field(p.get("gcd").unwrap_or(&Value::Null), "trusted_profile.gcd")?;
        let strict = p.get("strict").and_then(Value::as_bool).ok_or_else(|| Error::Parse("trusted_profile.strict: expected a boolean".into()))?;
        inst.trusted_profile = Some(ModularityProfile { delta, gcd, strictly_modular: strict, witness_basis: None });
    }
    Ok(inst)
}

pub fn parse_instance(path: &Path) -> Result<ProblemInstance> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("instance");
    parse_instance_str(&text, stem).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Numbers that fit in an `i64` are written as JSON numbers, others as strings.
fn int_json(v: &BigInt) -> Value {
    match i64::try_from(v) {
        Ok(i) => json!(i),
        Err(_) => json!(v.to_string()),
    }
}

pub fn instance_to_json(inst: &ProblemInstance) -> String {
    let a: Vec<Value> = (0..inst.m()).map(|i| Value::Array(inst.a.row(i).iter().map(int_json).collect())).collect();
    let mut doc = json!({
        "A": a,
        "b": inst.b.iter().map(int_json).collect::<Vec<_>>(),
        "label": inst.label,
    });
    if let Some(h) = &inst.graph_hint {
        doc["graph_hint"] = json!({
            "nodes": h.nodes,
            "arcs": h.arcs.iter().map(|&(t, h)| json!([t, h])).collect::<Vec<_>>(),
            "column_map": h.column_map,
        });
    }
    if let Some(p) = &inst.trusted_profile {
        doc["trusted_profile"] = json!({ "delta": int_json(&p.delta), "gcd": int_json(&p.gcd), "strict": p.strictly_modular });
    }
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
    s.push('\n');
    s
}

pub fn write_instance(inst: &ProblemInstance, path: &Path) -> Result<()> {
    std::fs::write(path, instance_to_json(inst)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Terms and right-hand side multiplied by the lcm of their denominators.
fn cleared(row: &Row) -> (Vec<(usize, BigInt)>, BigInt) {
    let l = row.terms.iter().map(|(_, c)| c.denom().clone()).fold(row.rhs.denom().clone(), |acc, d| acc.lcm(&d));
    let scale = BigRational::from_integer(l);
    let terms = row.terms.iter().map(|(j, c)| (*j, (c * &scale).to_integer())).collect();
    (terms, (&row.rhs * &scale).to_integer())
}

fn tag_name(tag: RowTag) -> String {
    match tag {
        RowTag::Original => "orig".into(),
        RowTag::Linking => "link".into(),
        RowTag::Projection => "proj".into(),
        RowTag::FlowSum => "flow".into(),
        RowTag::Disjunct(t) => format!("dj{t}"),
        RowTag::Convexity => "conv".into(),
        RowTag::Cone => "cone".into(),
        RowTag::Box => "box".into(),
        RowTag::Infeasible => "infeas".into(),
    }
}

fn parse_tag(s: &str) -> Result<RowTag> {
    Ok(match s {
        "orig" => RowTag::Original,
        "link" => RowTag::Linking,
        "proj" => RowTag::Projection,
        "flow" => RowTag::FlowSum,
        "conv" => RowTag::Convexity,
        "cone" => RowTag::Cone,
        "box" => RowTag::Box,
        "infeas" => RowTag::Infeasible,
        _ => match s.strip_prefix("dj").and_then(|t| t.parse().ok()) {
            Some(t) => RowTag::Disjunct(t),
            None => return Err(Error::Parse(format!("unknown row tag `{s}`"))),
        },
    })
}

fn block_name(b: Block) -> String {
    match b {
        Block::Original => "original".into(),
        Block::Slack => "slack".into(),
        Block::Layered => "layered".into(),
        Block::DisjunctFlow(t) => format!("flow:{t}"),
        Block::Segment(t, j) => format!("segment:{t}:{j}"),
        Block::Multiplier(t) => format!("multiplier:{t}"),
    }
}

fn parse_block(s: &str) -> Result<Block> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |k: usize| parts.get(k).and_then(|p| p.parse::<usize>().ok()).ok_or_else(|| Error::Parse(format!("bad block `{s}`")));
    Ok(match parts[0] {
        "original" => Block::Original,
        "slack" => Block::Slack,
        "layered" => Block::Layered,
        "flow" => Block::DisjunctFlow(num(1)?),
        "segment" => Block::Segment(num(1)?, num(2)?),
        "multiplier" => Block::Multiplier(num(1)?),
        _ => return Err(Error::Parse(format!("unknown block `{s}`"))),
    })
}

fn parse_sense(s: &str) -> Result<Sense> {
    match s {
        "<=" => Ok(Sense::Le),
        ">=" => Ok(Sense::Ge),
        "=" => Ok(Sense::Eq),
        _ => Err(Error::Parse(format!("unknown sense `{s}`"))),
    }
}

/// Serialized form of a [`Formulation`]; rationals are `[numerator, denominator]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulationDoc {
    pub label: String,
    pub branch: String,
    pub variables: Vec<VariableDoc>,
    pub projection: Vec<usize>,
    pub rows: Vec<RowDoc>,
    pub size: SizeDoc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableDoc {
    pub name: String,
    pub block: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowDoc {
    pub tag: String,
    pub sense: String,
    pub rhs: [String; 2],
    pub terms: Vec<(usize, [String; 2])>,
}

/// Counts as decimal strings so `u128` survives every JSON reader.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeDoc {
    pub inequalities: usize,
    pub equations: usize,
    pub declared_bound: String,
    pub linking_rows: usize,
    pub delta: u64,
    pub base_nodes: usize,
    pub base_arcs: usize,
    pub layered_arcs: usize,
    pub disjuncts: usize,
    pub poly_constant: String,
    pub poly_bound: String,
}

fn rat_doc(v: &BigRational) -> [String; 2] {
    [v.numer().to_string(), v.denom().to_string()]
}

fn parse_rat(v: &[String; 2]) -> Result<BigRational> {
    let n: BigInt = v[0].parse().map_err(|_| Error::Parse(format!("bad numerator `{}`", v[0])))?;
    let d: BigInt = v[1].parse().map_err(|_| Error::Parse(format!("bad denominator `{}`", v[1])))?;
    if d.is_zero() {
        return Err(Error::Parse("zero denominator".into()));
    }
    Ok(BigRational::new(n, d))
}

fn parse_u128(s: &str) -> Result<u128> {
    s.parse().map_err(|_| Error::Parse(format!("bad count `{s}`")))
}

impl FormulationDoc {
    pub fn new(form: &Formulation, label: &str, branch: &str) -> Self {
        let s = &form.size;
        Self {
            label: label.to_string(),
            branch: branch.to_string(),
            variables: form.vars.iter().map(|v| VariableDoc { name: v.name.clone(), block: block_name(v.block) }).collect(),
            projection: form.projection.clone(),
            rows: form
                .rows
                .iter()
                .map(|r| RowDoc {
                    tag: tag_name(r.tag),
                    sense: r.sense.symbol().to_string(),
                    rhs: rat_doc(&r.rhs),
                    terms: r.terms.iter().map(|(j, c)| (*j, rat_doc(c))).collect(),
                })
                .collect(),
            size: SizeDoc {
                inequalities: s.inequalities,
                equations: s.equations,
                declared_bound: s.declared_bound.to_string(),
                linking_rows: s.linking_rows,
                delta: s.delta,
                base_nodes: s.base_nodes,
                base_arcs: s.base_arcs,
                layered_arcs: s.layered_arcs,
                disjuncts: s.disjuncts,
                poly_constant: s.poly_constant.to_string(),
                poly_bound: s.poly_bound.to_string(),
            },
        }
    }

    pub fn to_formulation(&self) -> Result<Formulation> {
        let vars = self
            .variables
            .iter()
            .map(|v| Ok(Variable { name: v.name.clone(), block: parse_block(&v.block)? }))
            .collect::<Result<Vec<_>>>()?;
        let nv = vars.len();
        let mut rows = Vec::with_capacity(self.rows.len());
        for (i, r) in self.rows.iter().enumerate() {
            let mut terms = Vec::with_capacity(r.terms.len());
            for (j, c) in &r.terms {
                if *j >= nv {
                    return Err(Error::Parse(format!("row {i}: variable index {j} out of range")));
                }
                terms.push((*j, parse_rat(c)?));
            }
            rows.push(Row::new(terms, parse_sense(&r.sense)?, parse_rat(&r.rhs)?, parse_tag(&r.tag)?));
        }
        if self.projection.iter().any(|&j| j >= nv) {
            return Err(Error::Parse("projection index out of range".into()));
        }
        let s = &self.size;
        let size = SizeInfo {
            inequalities: s.inequalities,
            equations: s.equations,
            declared_bound: parse_u128(&s.declared_bound)?,
            linking_rows: s.linking_rows,
            delta: s.delta,
            base_nodes: s.base_nodes,
            base_arcs: s.base_arcs,
            layered_arcs: s.layered_arcs,
            disjuncts: s.disjuncts,
            poly_constant: parse_u128(&s.poly_constant)?,
            poly_bound: parse_u128(&s.poly_bound)?,
        };
        Ok(Formulation { vars, rows, projection: self.projection.clone(), size })
    }
}

pub fn formulation_to_json(form: &Formulation, label: &str, branch: &str) -> String {
    let mut s = serde_json::to_string_pretty(&FormulationDoc::new(form, label, branch)).expect("serializable");
    s.push('\n');
    s
}

pub fn parse_formulation_json(text: &str) -> Result<FormulationDoc> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))
}

/// CPLEX LP text. The objective is a zero placeholder; every variable is
/// free and sign constraints appear as rows.
pub fn to_lp(form: &Formulation, label: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ {label}");
    let _ = writeln!(out, "\\ {} variables, {} rows", form.num_vars(), form.rows.len());
    out.push_str("Minimize\n");
    let first = form.vars.first().map_or("x", |v| v.name.as_str());
    let _ = writeln!(out, " obj: 0 {first}");
    out.push_str("Subject To\n");
    for (i, row) in form.rows.iter().enumerate() {
        let (terms, rhs) = cleared(row);
        let mut line = format!(" {}_{i}:", tag_name(row.tag));
        if terms.is_empty() {
            let _ = write!(line, " 0 {first}");
        }
        for (k, (j, c)) in terms.iter().enumerate() {
            if k > 0 && k % 8 == 0 {
                out.push_str(&line);
                out.push('\n');
                line = "   ".to_string();
            }
            let sign = if c.sign() == num_bigint::Sign::Minus { "-" } else { "+" };
            let mag = if c.sign() == num_bigint::Sign::Minus { -c } else { c.clone() };
            if mag.is_one() {
                let _ = write!(line, " {sign} {}", form.vars[*j].name);
            } else {
                let _ = write!(line, " {sign} {mag} {}", form.vars[*j].name);
            }
        }
        let _ = writeln!(line, " {} {rhs}", row.sense.symbol());
        out.push_str(&line);
    }
    out.push_str("Bounds\n");
    for v in &form.vars {
        let _ = writeln!(out, " {} free", v.name);
    }
    out.push_str("End\n");
    out
}

fn mps_number(v: &BigInt) -> Result<String> {
    let s = v.to_string();
    if s.len() > 12 {
        return Err(Error::Emit(format!("value {s} does not fit a 12-character MPS field")));
    }
    Ok(s)
}

/// One fixed-field line: fields start at columns 2, 5, 15, 25, 40, 50.
fn mps_line(f1: &str, f2: &str, f3: &str, f4: &str, f5: &str, f6: &str) -> String {
    let mut s = format!(" {f1:<2} {f2:<8}  {f3:<8}  {f4:>12}");
    if !f5.is_empty() {
        s.push_str(&format!("   {f5:<8}  {f6:>12}"));
    }
    s.trim_end().to_string()
}

/// Fixed-format MPS with rows `R0000001...` and columns `C0000001...`.
pub fn to_mps(form: &Formulation, label: &str) -> Result<String> {
    if form.rows.len() > 9_999_999 || form.num_vars() > 9_999_999 {
        return Err(Error::Emit("more than 9999999 rows or columns".into()));
    }
    let row_name = |i: usize| format!("R{:07}", i + 1);
    let col_name = |j: usize| format!("C{:07}", j + 1);
    let mut out = String::new();
    let _ = writeln!(out, "NAME          {label}");
    out.push_str("ROWS\n");
    out.push_str(" N  OBJ\n");
    let mut by_col: Vec<Vec<(usize, BigInt)>> = vec![Vec::new(); form.num_vars()];
    let mut rhs: Vec<BigInt> = Vec::with_capacity(form.rows.len());
    for (i, row) in form.rows.iter().enumerate() {
        let kind = match row.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        let _ = writeln!(out, " {kind}  {}", row_name(i));
        let (terms, r) = cleared(row);
        for (j, c) in terms {
            by_col[j].push((i, c));
        }
        rhs.push(r);
    }
    out.push_str("COLUMNS\n");
    for (j, entries) in by_col.iter().enumerate() {
        let mut fields: Vec<(String, String)> = vec![("OBJ".into(), "0".into())];
        for (i, c) in entries {
            fields.push((row_name(*i), mps_number(c)?));
        }
        for pair in fields.chunks(2) {
            let (f5, f6) = pair.get(1).map_or(("", ""), |p| (p.0.as_str(), p.1.as_str()));
            out.push_str(&mps_line("", &col_name(j), &pair[0].0, &pair[0].1, f5, f6));
            out.push('\n');
        }
    }
    out.push_str("RHS\n");
    let nonzero: Vec<(String, String)> =
        rhs.iter().enumerate().filter(|(_, r)| !r.is_zero()).map(|(i, r)| Ok((row_name(i), mps_number(r)?))).collect::<Result<_>>()?;
    for pair in nonzero.chunks(2) {
        let (f5, f6) = pair.get(1).map_or(("", ""), |p| (p.0.as_str(), p.1.as_str()));
        out.push_str(&mps_line("", "RHS", &pair[0].0, &pair[0].1, f5, f6));
        out.push('\n');
    }
    out.push_str("BOUNDS\n");
    for j in 0..form.num_vars() {
        out.push_str(&mps_line("FR", "BND", &col_name(j), "", "", ""));
        out.push('\n');
    }
    out.push_str("ENDATA\n");
    Ok(out)
}

pub fn render(art: &EfArtifact, format: Format) -> Result<String> {
    match format {
        Format::Lp => Ok(to_lp(&art.formulation, &art.label)),
        Format::Mps => to_mps(&art.formulation, &art.label),
        Format::Json => Ok(formulation_to_json(&art.formulation, &art.label, art.branch.name())),
    }
}

pub fn emit(art: &EfArtifact, format: Format, path: &Path) -> Result<()> {
    let text = render(art, format)?;
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
