//! JSON interchange for expressions, chains, derivation values, and
//! decomposition reports. One object per node with a `kind` discriminator;
//! scalars travel as strings in the field's textual form. Schema violations
//! report a JSON pointer to the offending element.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use glcf_core::chain::{BracketChain, ChainOperand, ChainStep, StepRule};
use glcf_core::derivations::{Decomposition, DerivationVal, SigmaTable};
use glcf_core::expr::MatExpr;
use glcf_core::field::{FieldElem, FieldId};
use glcf_core::index_set::{IndexSet, SetKind};
use glcf_core::seq::{SeqDesc, SeqKind};
use glcf_core::zexpr::{ZMatExpr, ZSeq, ZSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JsonError {
    pub pointer: String,
    pub msg: String,
}

impl std::fmt::Display for JsonError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "schema violation at {}: {}", self.pointer, self.msg)
    }
}

type JResult<T> = Result<T, JsonError>;

fn fail<T>(path: &[String], msg: impl Into<String>) -> JResult<T> {
    Err(JsonError {
        pointer: format!("/{}", path.join("/")),
        msg: msg.into(),
    })
}

macro_rules! with_seg {
    ($path:expr, $seg:expr, $body:expr) => {{
        $path.push($seg.to_string());
        let r = $body;
        $path.pop();
        r
    }};
}

// ---------------------------------------------------------------------------
// Rendering to JSON.

pub fn field_to_json(field: FieldId) -> Value {
    Value::String(field.to_string())
}

pub fn scalar_str(v: &FieldElem) -> String {
    v.to_string()
}

pub fn seq_to_json(s: &SeqDesc) -> Value {
    match s.kind() {
        SeqKind::FiniteSupport(map) => json!({
            "kind": "finite_support",
            "entries": map.iter().map(|(i, v)| json!({"index": i, "value": scalar_str(v)})).collect::<Vec<_>>(),
        }),
        SeqKind::EventuallyConstant(prefix, tail) => json!({
            "kind": "eventually_constant",
            "prefix": prefix.iter().map(scalar_str).collect::<Vec<_>>(),
            "tail": scalar_str(&tail),
        }),
        SeqKind::EventuallyPeriodic(prefix, period) => json!({
            "kind": "eventually_periodic",
            "prefix": prefix.iter().map(scalar_str).collect::<Vec<_>>(),
            "period": period.iter().map(scalar_str).collect::<Vec<_>>(),
        }),
    }
}

pub fn set_to_json(s: &IndexSet) -> Value {
    match s.kind() {
        SetKind::Finite(members) => json!({
            "kind": "finite",
            "members": members.iter().collect::<Vec<_>>(),
        }),
        SetKind::EventuallyPeriodic(prefix, period) => json!({
            "kind": "eventually_periodic",
            "prefix": prefix,
            "period": period,
        }),
    }
}

pub fn expr_to_json(e: &MatExpr) -> Value {
    match e {
        MatExpr::Zero => json!({"kind": "zero"}),
        MatExpr::ScalarE(c) => json!({"kind": "scalar", "value": scalar_str(c)}),
        MatExpr::Basis(i, j) => json!({"kind": "basis", "row": i, "col": j}),
        MatExpr::FiniteLit(entries) => json!({
            "kind": "finite",
            "entries": entries.iter().map(|(&(i, j), v)| json!({
                "row": i, "col": j, "value": scalar_str(v)
            })).collect::<Vec<_>>(),
        }),
        MatExpr::Diag(s) => json!({"kind": "diag", "seq": seq_to_json(s)}),
        MatExpr::Shift {
            offset,
            rows,
            weights,
        } => json!({
            "kind": "shift",
            "offset": offset,
            "rows": set_to_json(rows),
            "weights": seq_to_json(weights),
        }),
        MatExpr::RowMat { row, seq } => json!({
            "kind": "row", "row": row, "seq": seq_to_json(seq)
        }),
        MatExpr::Sum(terms) => json!({
            "kind": "sum",
            "terms": terms.iter().map(expr_to_json).collect::<Vec<_>>(),
        }),
        MatExpr::Scale(c, inner) => json!({
            "kind": "scale", "coeff": scalar_str(c), "term": expr_to_json(inner)
        }),
        MatExpr::Prod(a, b) => json!({
            "kind": "prod", "lhs": expr_to_json(a), "rhs": expr_to_json(b)
        }),
        MatExpr::Bracket(a, b) => json!({
            "kind": "bracket", "lhs": expr_to_json(a), "rhs": expr_to_json(b)
        }),
        MatExpr::SolveShift(a) => json!({
            "kind": "solve_shift", "rhs": expr_to_json(a)
        }),
    }
}

pub fn zseq_to_json(s: &ZSeq) -> Value {
    json!({
        "kind": "two_sided",
        "neg": seq_to_json(&s.neg),
        "zero": scalar_str(&s.at_zero),
        "pos": seq_to_json(&s.pos),
    })
}

pub fn zset_to_json(s: &ZSet) -> Value {
    json!({
        "kind": "two_sided",
        "neg": set_to_json(&s.neg),
        "zero": s.at_zero,
        "pos": set_to_json(&s.pos),
    })
}

pub fn zexpr_to_json(e: &ZMatExpr) -> Value {
    match e {
        ZMatExpr::Zero => json!({"kind": "zero"}),
        ZMatExpr::ScalarE(c) => json!({"kind": "scalar", "value": scalar_str(c)}),
        ZMatExpr::Basis(i, j) => json!({"kind": "basis", "row": i, "col": j}),
        ZMatExpr::FiniteLit(entries) => json!({
            "kind": "finite",
            "entries": entries.iter().map(|(&(i, j), v)| json!({
                "row": i, "col": j, "value": scalar_str(v)
            })).collect::<Vec<_>>(),
        }),
        ZMatExpr::Diag(s) => json!({"kind": "diag", "seq": zseq_to_json(s)}),
        ZMatExpr::Shift {
            offset,
            rows,
            weights,
        } => json!({
            "kind": "shift",
            "offset": offset,
            "rows": zset_to_json(rows),
            "weights": zseq_to_json(weights),
        }),
        ZMatExpr::RowMat { row, seq } => json!({
            "kind": "row", "row": row, "seq": zseq_to_json(seq)
        }),
        ZMatExpr::Sum(terms) => json!({
            "kind": "sum",
            "terms": terms.iter().map(zexpr_to_json).collect::<Vec<_>>(),
        }),
        ZMatExpr::Scale(c, inner) => json!({
            "kind": "scale", "coeff": scalar_str(c), "term": zexpr_to_json(inner)
        }),
        ZMatExpr::Prod(a, b) => json!({
            "kind": "prod", "lhs": zexpr_to_json(a), "rhs": zexpr_to_json(b)
        }),
        ZMatExpr::Bracket(a, b) => json!({
            "kind": "bracket", "lhs": zexpr_to_json(a), "rhs": zexpr_to_json(b)
        }),
    }
}

fn operand_to_json(op: &ChainOperand) -> Value {
    match op {
        ChainOperand::Seed => json!({"kind": "seed"}),
        ChainOperand::Step(k) => json!({"kind": "step", "index": k}),
        ChainOperand::Expr(e) => json!({"kind": "expr", "expr": expr_to_json(e)}),
    }
}

pub fn chain_to_json(chain: &BracketChain) -> Value {
    let steps: Vec<Value> = chain
        .steps
        .iter()
        .map(|s| {
            let rule = match &s.rule {
                StepRule::Bracket { lhs, rhs } => json!({
                    "kind": "bracket",
                    "lhs": operand_to_json(lhs),
                    "rhs": operand_to_json(rhs),
                }),
                StepRule::Combine { terms } => json!({
                    "kind": "combine",
                    "terms": terms.iter().map(|(c, op)| json!({
                        "coeff": scalar_str(c),
                        "operand": operand_to_json(op),
                    })).collect::<Vec<_>>(),
                }),
            };
            json!({
                "rule": rule,
                "result": expr_to_json(&s.result),
                "note": s.note,
            })
        })
        .collect();
    json!({
        "field": field_to_json(chain.field),
        "seed": chain.seed.as_ref().map(expr_to_json).unwrap_or(Value::Null),
        "steps": steps,
        "target": expr_to_json(&chain.target),
    })
}

pub fn sigma_to_json(s: &SigmaTable) -> Value {
    json!({
        "bound": s.bound,
        "zero_extend": s.zero_extend,
        "values": s.values.iter().map(|(k, v)| json!({
            "index": k, "value": scalar_str(v)
        })).collect::<Vec<_>>(),
    })
}

pub fn derivation_to_json(d: &DerivationVal) -> Value {
    json!({
        "field": field_to_json(d.field),
        "inner": expr_to_json(&d.inner),
        "central": sigma_to_json(&d.central),
    })
}

pub fn decomposition_to_json(field: FieldId, d: &Decomposition) -> Value {
    json!({
        "field": field_to_json(field),
        "inner": expr_to_json(&d.inner),
        "sigma": sigma_to_json(&d.sigma),
        "report": {
            "probe_bound": d.report.probe_bound,
            "window": d.report.window,
            "diag_antisymmetry_ok": d.report.diag_antisymmetry_ok,
            "superdiag_antisymmetry_ok": d.report.superdiag_antisymmetry_ok,
            "residuals_clean": d.report.residuals_clean(),
            "residuals": d.report.residuals.iter().map(|r| json!({
                "probe": expr_to_json(&r.probe),
                "nonzero": r.nonzero.iter().map(|(i, j, v)| json!({
                    "row": i, "col": j, "value": scalar_str(v)
                })).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        },
    })
}

/// Wraps an expression with its field tag.
pub fn expr_document(field: FieldId, e: &MatExpr) -> Value {
    json!({"field": field_to_json(field), "expr": expr_to_json(e)})
}

pub fn zexpr_document(field: FieldId, e: &ZMatExpr) -> Value {
    json!({"field": field_to_json(field), "expr": zexpr_to_json(e)})
}

// ---------------------------------------------------------------------------
// Parsing from JSON.

pub fn field_from_str(text: &str) -> Option<FieldId> {
    match text {
        "q" => Some(FieldId::Rational),
        "z" => Some(FieldId::Integer),
        _ => {
            let p: u32 = text.strip_prefix("fp:")?.parse().ok()?;
            if p >= 2 && p < (1 << 31) && is_prime(p) {
                Some(FieldId::Prime(p))
            } else {
                None
            }
        }
    }
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    let p = u64::from(p);
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn as_object<'v>(v: &'v Value, path: &[String]) -> JResult<&'v Map<String, Value>> {
    v.as_object().ok_or(()).or_else(|_| fail(path, "expected an object"))
}

fn get<'v>(obj: &'v Map<String, Value>, key: &str, path: &mut Vec<String>) -> JResult<&'v Value> {
    match obj.get(key) {
        Some(v) => Ok(v),
        None => with_seg!(path, key, fail(path, "missing field")),
    }
}

fn kind_of<'v>(obj: &'v Map<String, Value>, path: &mut Vec<String>) -> JResult<&'v str> {
    let v = get(obj, "kind", path)?;
    match v.as_str() {
        Some(s) => Ok(s),
        None => with_seg!(path, "kind", fail(path, "expected a string")),
    }
}

fn str_at<'v>(obj: &'v Map<String, Value>, key: &str, path: &mut Vec<String>) -> JResult<&'v str> {
    let v = get(obj, key, path)?;
    match v.as_str() {
        Some(s) => Ok(s),
        None => with_seg!(path, key, fail(path, "expected a string")),
    }
}

fn u64_at(obj: &Map<String, Value>, key: &str, path: &mut Vec<String>) -> JResult<u64> {
    let v = get(obj, key, path)?;
    match v.as_u64() {
        Some(s) => Ok(s),
        None => with_seg!(path, key, fail(path, "expected a nonnegative integer")),
    }
}

fn i64_at(obj: &Map<String, Value>, key: &str, path: &mut Vec<String>) -> JResult<i64> {
    let v = get(obj, key, path)?;
    match v.as_i64() {
        Some(s) => Ok(s),
        None => with_seg!(path, key, fail(path, "expected an integer")),
    }
}

fn bool_at(obj: &Map<String, Value>, key: &str, path: &mut Vec<String>) -> JResult<bool> {
    let v = get(obj, key, path)?;
    match v.as_bool() {
        Some(s) => Ok(s),
        None => with_seg!(path, key, fail(path, "expected a boolean")),
    }
}

fn arr_at<'v>(
    obj: &'v Map<String, Value>,
    key: &str,
    path: &mut Vec<String>,
) -> JResult<&'v Vec<Value>> {
    let v = get(obj, key, path)?;
    match v.as_array() {
        Some(s) => Ok(s),
        None => with_seg!(path, key, fail(path, "expected an array")),
    }
}

fn scalar_at(
    obj: &Map<String, Value>,
    key: &str,
    field: FieldId,
    path: &mut Vec<String>,
) -> JResult<FieldElem> {
    let text = str_at(obj, key, path)?;
    match field.parse(text) {
        Ok(v) => Ok(v),
        Err(e) => with_seg!(path, key, fail(path, e.to_string())),
    }
}

fn scalar_list(
    obj: &Map<String, Value>,
    key: &str,
    field: FieldId,
    path: &mut Vec<String>,
) -> JResult<Vec<FieldElem>> {
    let arr = arr_at(obj, key, path)?.clone();
    with_seg!(path, key, {
        let mut out = Vec::new();
        for (idx, v) in arr.iter().enumerate() {
            let text = match v.as_str() {
                Some(s) => s,
                None => return with_seg!(path, idx, fail(path, "expected a string")),
            };
            match field.parse(text) {
                Ok(e) => out.push(e),
                Err(e) => return with_seg!(path, idx, fail(path, e.to_string())),
            }
        }
        Ok(out)
    })
}

fn bool_list(obj: &Map<String, Value>, key: &str, path: &mut Vec<String>) -> JResult<Vec<bool>> {
    let arr = arr_at(obj, key, path)?.clone();
    with_seg!(path, key, {
        let mut out = Vec::new();
        for (idx, v) in arr.iter().enumerate() {
            match v.as_bool() {
                Some(b) => out.push(b),
                None => return with_seg!(path, idx, fail(path, "expected a boolean")),
            }
        }
        Ok(out)
    })
}

pub fn seq_from_json(v: &Value, field: FieldId, path: &mut Vec<String>) -> JResult<SeqDesc> {
    let obj = as_object(v, path)?;
    match kind_of(obj, path)? {
        "finite_support" => {
            let arr = arr_at(obj, "entries", path)?.clone();
            with_seg!(path, "entries", {
                let mut map = BTreeMap::new();
                for (idx, e) in arr.iter().enumerate() {
                    with_seg!(path, idx, {
                        let eobj = as_object(e, path)?;
                        let i = u64_at(eobj, "index", path)?;
                        let val = scalar_at(eobj, "value", field, path)?;
                        map.insert(i, val);
                        Ok(())
                    })?;
                }
                match SeqDesc::finite_support(field, &map) {
                    Ok(s) => Ok(s),
                    Err(e) => fail(path, e.to_string()),
                }
            })
        }
        "eventually_constant" => {
            let prefix = scalar_list(obj, "prefix", field, path)?;
            let tail = scalar_at(obj, "tail", field, path)?;
            SeqDesc::eventually_constant(field, prefix, tail)
                .or_else(|e| fail(path, e.to_string()))
        }
        "eventually_periodic" => {
            let prefix = scalar_list(obj, "prefix", field, path)?;
            let period = scalar_list(obj, "period", field, path)?;
            SeqDesc::eventually_periodic(field, prefix, period)
                .or_else(|e| fail(path, e.to_string()))
        }
        other => with_seg!(path, "kind", fail(path, format!("unknown kind {other:?}"))),
    }
}

pub fn set_from_json(v: &Value, path: &mut Vec<String>) -> JResult<IndexSet> {
    let obj = as_object(v, path)?;
    match kind_of(obj, path)? {
        "finite" => {
            let arr = arr_at(obj, "members", path)?.clone();
            with_seg!(path, "members", {
                let mut members = std::collections::BTreeSet::new();
                for (idx, m) in arr.iter().enumerate() {
                    match m.as_u64() {
                        Some(x) => {
                            members.insert(x);
                        }
                        None => {
                            return with_seg!(path, idx, fail(path, "expected an index"));
                        }
                    }
                }
                IndexSet::finite(&members).or_else(|e| fail(path, e.to_string()))
            })
        }
        "eventually_periodic" => {
            let prefix = bool_list(obj, "prefix", path)?;
            let period = bool_list(obj, "period", path)?;
            IndexSet::eventually_periodic(prefix, period).or_else(|e| fail(path, e.to_string()))
        }
        "all" => Ok(IndexSet::all()),
        other => with_seg!(path, "kind", fail(path, format!("unknown kind {other:?}"))),
    }
}

pub fn expr_from_json(v: &Value, field: FieldId, path: &mut Vec<String>) -> JResult<MatExpr> {
    let obj = as_object(v, path)?;
    match kind_of(obj, path)? {
        "zero" => Ok(MatExpr::Zero),
        "scalar" => Ok(MatExpr::ScalarE(scalar_at(obj, "value", field, path)?)),
        "basis" => {
            let i = u64_at(obj, "row", path)?;
            let j = u64_at(obj, "col", path)?;
            if i < 1 || j < 1 {
                return fail(path, "indices are 1-based");
            }
            Ok(MatExpr::basis(i, j))
        }
        "finite" => {
            let arr = arr_at(obj, "entries", path)?.clone();
            with_seg!(path, "entries", {
                let mut map = BTreeMap::new();
                for (idx, e) in arr.iter().enumerate() {
                    with_seg!(path, idx, {
                        let eobj = as_object(e, path)?;
                        let i = u64_at(eobj, "row", path)?;
                        let j = u64_at(eobj, "col", path)?;
                        if i < 1 || j < 1 {
                            return fail(path, "indices are 1-based");
                        }
                        let val = scalar_at(eobj, "value", field, path)?;
                        map.insert((i, j), val);
                        Ok(())
                    })?;
                }
                Ok(MatExpr::FiniteLit(map))
            })
        }
        "diag" => {
            let seq = get(obj, "seq", path)?.clone();
            let s = with_seg!(path, "seq", seq_from_json(&seq, field, path))?;
            Ok(MatExpr::Diag(s))
        }
        "shift" => {
            let offset = i64_at(obj, "offset", path)?;
            if offset == 0 {
                return with_seg!(path, "offset", fail(path, "offset must be nonzero"));
            }
            let rows_v = get(obj, "rows", path)?.clone();
            let rows = with_seg!(path, "rows", set_from_json(&rows_v, path))?;
            let w_v = get(obj, "weights", path)?.clone();
            let weights = with_seg!(path, "weights", seq_from_json(&w_v, field, path))?;
            Ok(MatExpr::Shift {
                offset,
                rows,
                weights,
            })
        }
        "row" => {
            let r = u64_at(obj, "row", path)?;
            if r < 1 {
                return fail(path, "indices are 1-based");
            }
            let seq_v = get(obj, "seq", path)?.clone();
            let seq = with_seg!(path, "seq", seq_from_json(&seq_v, field, path))?;
            Ok(MatExpr::RowMat { row: r, seq })
        }
        "sum" => {
            let arr = arr_at(obj, "terms", path)?.clone();
            with_seg!(path, "terms", {
                let mut terms = Vec::new();
                for (idx, t) in arr.iter().enumerate() {
                    terms.push(with_seg!(path, idx, expr_from_json(t, field, path))?);
                }
                Ok(MatExpr::Sum(terms))
            })
        }
        "scale" => {
            let c = scalar_at(obj, "coeff", field, path)?;
            let t = get(obj, "term", path)?.clone();
            let inner = with_seg!(path, "term", expr_from_json(&t, field, path))?;
            Ok(MatExpr::scale(c, inner))
        }
        "prod" | "bracket" => {
            let kind = kind_of(obj, path)?.to_string();
            let l = get(obj, "lhs", path)?.clone();
            let lhs = with_seg!(path, "lhs", expr_from_json(&l, field, path))?;
            let r = get(obj, "rhs", path)?.clone();
            let rhs = with_seg!(path, "rhs", expr_from_json(&r, field, path))?;
            Ok(if kind == "prod" {
                MatExpr::prod(lhs, rhs)
            } else {
                MatExpr::bracket(lhs, rhs)
            })
        }
        "solve_shift" => {
            let r = get(obj, "rhs", path)?.clone();
            let rhs = with_seg!(path, "rhs", expr_from_json(&r, field, path))?;
            Ok(MatExpr::SolveShift(Box::new(rhs)))
        }
        other => with_seg!(path, "kind", fail(path, format!("unknown kind {other:?}"))),
    }
}

pub fn zseq_from_json(v: &Value, field: FieldId, path: &mut Vec<String>) -> JResult<ZSeq> {
    let obj = as_object(v, path)?;
    match kind_of(obj, path)? {
        "two_sided" => {
            let neg_v = get(obj, "neg", path)?.clone();
            let neg = with_seg!(path, "neg", seq_from_json(&neg_v, field, path))?;
            let at_zero = scalar_at(obj, "zero", field, path)?;
            let pos_v = get(obj, "pos", path)?.clone();
            let pos = with_seg!(path, "pos", seq_from_json(&pos_v, field, path))?;
            Ok(ZSeq { neg, at_zero, pos })
        }
        other => with_seg!(path, "kind", fail(path, format!("unknown kind {other:?}"))),
    }
}

pub fn zset_from_json(v: &Value, path: &mut Vec<String>) -> JResult<ZSet> {
    let obj = as_object(v, path)?;
    match kind_of(obj, path)? {
        "two_sided" => {
            let neg_v = get(obj, "neg", path)?.clone();
            let neg = with_seg!(path, "neg", set_from_json(&neg_v, path))?;
            let at_zero = bool_at(obj, "zero", path)?;
            let pos_v = get(obj, "pos", path)?.clone();
            let pos = with_seg!(path, "pos", set_from_json(&pos_v, path))?;
            Ok(ZSet { neg, at_zero, pos })
        }
        other => with_seg!(path, "kind", fail(path, format!("unknown kind {other:?}"))),
    }
}

pub fn zexpr_from_json(v: &Value, field: FieldId, path: &mut Vec<String>) -> JResult<ZMatExpr> {
    let obj = as_object(v, path)?;
    match kind_of(obj, path)? {
        "zero" => Ok(ZMatExpr::Zero),
        "scalar" => Ok(ZMatExpr::ScalarE(scalar_at(obj, "value", field, path)?)),
        "basis" => Ok(ZMatExpr::basis(
            i64_at(obj, "row", path)?,
            i64_at(obj, "col", path)?,
        )),
        "finite" => {
            let arr = arr_at(obj, "entries", path)?.clone();
            with_seg!(path, "entries", {
                let mut map = BTreeMap::new();
                for (idx, e) in arr.iter().enumerate() {
                    with_seg!(path, idx, {
                        let eobj = as_object(e, path)?;
                        let i = i64_at(eobj, "row", path)?;
                        let j = i64_at(eobj, "col", path)?;
                        let val = scalar_at(eobj, "value", field, path)?;
                        map.insert((i, j), val);
                        Ok(())
                    })?;
                }
                Ok(ZMatExpr::FiniteLit(map))
            })
        }
        "diag" => {
            let seq_v = get(obj, "seq", path)?.clone();
            let s = with_seg!(path, "seq", zseq_from_json(&seq_v, field, path))?;
            Ok(ZMatExpr::Diag(s))
        }
        "shift" => {
            let offset = i64_at(obj, "offset", path)?;
            if offset == 0 {
                return with_seg!(path, "offset", fail(path, "offset must be nonzero"));
            }
            let rows_v = get(obj, "rows", path)?.clone();
            let rows = with_seg!(path, "rows", zset_from_json(&rows_v, path))?;
            let w_v = get(obj, "weights", path)?.clone();
            let weights = with_seg!(path, "weights", zseq_from_json(&w_v, field, path))?;
            Ok(ZMatExpr::Shift {
                offset,
                rows,
                weights,
            })
        }
        "row" => {
            let r = i64_at(obj, "row", path)?;
            let seq_v = get(obj, "seq", path)?.clone();
            let seq = with_seg!(path, "seq", zseq_from_json(&seq_v, field, path))?;
            Ok(ZMatExpr::RowMat { row: r, seq })
        }
        "sum" => {
            let arr = arr_at(obj, "terms", path)?.clone();
            with_seg!(path, "terms", {
                let mut terms = Vec::new();
                for (idx, t) in arr.iter().enumerate() {
                    terms.push(with_seg!(path, idx, zexpr_from_json(t, field, path))?);
                }
                Ok(ZMatExpr::Sum(terms))
            })
        }
        "scale" => {
            let c = scalar_at(obj, "coeff", field, path)?;
            let t = get(obj, "term", path)?.clone();
            let inner = with_seg!(path, "term", zexpr_from_json(&t, field, path))?;
            Ok(ZMatExpr::scale(c, inner))
        }
        "prod" | "bracket" => {
            let kind = kind_of(obj, path)?.to_string();
            let l = get(obj, "lhs", path)?.clone();
            let lhs = with_seg!(path, "lhs", zexpr_from_json(&l, field, path))?;
            let r = get(obj, "rhs", path)?.clone();
            let rhs = with_seg!(path, "rhs", zexpr_from_json(&r, field, path))?;
            Ok(if kind == "prod" {
                ZMatExpr::prod(lhs, rhs)
            } else {
                ZMatExpr::bracket(lhs, rhs)
            })
        }
        other => with_seg!(path, "kind", fail(path, format!("unknown kind {other:?}"))),
    }
}

fn operand_from_json(v: &Value, field: FieldId, path: &mut Vec<String>) -> JResult<ChainOperand> {
    let obj = as_object(v, path)?;
    match kind_of(obj, path)? {
        "seed" => Ok(ChainOperand::Seed),
        "step" => Ok(ChainOperand::Step(u64_at(obj, "index", path)? as usize)),
        "expr" => {
            let e = get(obj, "expr", path)?.clone();
            Ok(ChainOperand::Expr(with_seg!(
                path,
                "expr",
                expr_from_json(&e, field, path)
            )?))
        }
        other => with_seg!(path, "kind", fail(path, format!("unknown kind {other:?}"))),
    }
}

pub fn chain_from_json(v: &Value, path: &mut Vec<String>) -> JResult<BracketChain> {
    let obj = as_object(v, path)?;
    let field_text = str_at(obj, "field", path)?;
    let field = match field_from_str(field_text) {
        Some(f) => f,
        None => return with_seg!(path, "field", fail(path, "unknown field tag")),
    };
    let seed = match obj.get("seed") {
        None | Some(Value::Null) => None,
        Some(v) => Some(with_seg!(path, "seed", expr_from_json(v, field, path))?),
    };
    let target_v = get(obj, "target", path)?.clone();
    let target = with_seg!(path, "target", expr_from_json(&target_v, field, path))?;
    let steps_arr = arr_at(obj, "steps", path)?.clone();
    let mut steps = Vec::new();
    with_seg!(path, "steps", {
        for (idx, sv) in steps_arr.iter().enumerate() {
            let step = with_seg!(path, idx, {
                let sobj = as_object(sv, path)?;
                let rule_v = get(sobj, "rule", path)?.clone();
                let rule = with_seg!(path, "rule", {
                    let robj = as_object(&rule_v, path)?;
                    match kind_of(robj, path)? {
                        "bracket" => {
                            let l = get(robj, "lhs", path)?.clone();
                            let lhs = with_seg!(path, "lhs", operand_from_json(&l, field, path))?;
                            let r = get(robj, "rhs", path)?.clone();
                            let rhs = with_seg!(path, "rhs", operand_from_json(&r, field, path))?;
                            Ok(StepRule::Bracket { lhs, rhs })
                        }
                        "combine" => {
                            let arr = arr_at(robj, "terms", path)?.clone();
                            with_seg!(path, "terms", {
                                let mut terms = Vec::new();
                                for (tidx, tv) in arr.iter().enumerate() {
                                    let term = with_seg!(path, tidx, {
                                        let tobj = as_object(tv, path)?;
                                        let c = scalar_at(tobj, "coeff", field, path)?;
                                        let o = get(tobj, "operand", path)?.clone();
                                        let op = with_seg!(
                                            path,
                                            "operand",
                                            operand_from_json(&o, field, path)
                                        )?;
                                        Ok((c, op))
                                    })?;
                                    terms.push(term);
                                }
                                Ok(StepRule::Combine { terms })
                            })
                        }
                        other => with_seg!(
                            path,
                            "kind",
                            fail(path, format!("unknown kind {other:?}"))
                        ),
                    }
                })?;
                let result_v = get(sobj, "result", path)?.clone();
                let result = with_seg!(path, "result", expr_from_json(&result_v, field, path))?;
                let note = str_at(sobj, "note", path)?.to_string();
                Ok(ChainStep { rule, result, note })
            })?;
            steps.push(step);
        }
        Ok(())
    })?;
    Ok(BracketChain {
        field,
        seed,
        steps,
        target,
    })
}

pub fn sigma_from_json(v: &Value, field: FieldId, path: &mut Vec<String>) -> JResult<SigmaTable> {
    let obj = as_object(v, path)?;
    let bound = u64_at(obj, "bound", path)?;
    let zero_extend = match obj.get("zero_extend") {
        Some(v) => match v.as_bool() {
            Some(b) => b,
            None => return with_seg!(path, "zero_extend", fail(path, "expected a boolean")),
        },
        None => true,
    };
    let mut values = BTreeMap::new();
    let arr = arr_at(obj, "values", path)?.clone();
    with_seg!(path, "values", {
        for (idx, e) in arr.iter().enumerate() {
            with_seg!(path, idx, {
                let eobj = as_object(e, path)?;
                let k = u64_at(eobj, "index", path)?;
                let val = scalar_at(eobj, "value", field, path)?;
                values.insert(k, val);
                Ok(())
            })?;
        }
        Ok(())
    })?;
    Ok(SigmaTable {
        bound,
        values,
        zero_extend,
    })
}

pub fn derivation_from_json(v: &Value, path: &mut Vec<String>) -> JResult<DerivationVal> {
    let obj = as_object(v, path)?;
    let field_text = str_at(obj, "field", path)?;
    let field = match field_from_str(field_text) {
        Some(f) => f,
        None => return with_seg!(path, "field", fail(path, "unknown field tag")),
    };
    let inner_v = get(obj, "inner", path)?.clone();
    let inner = with_seg!(path, "inner", expr_from_json(&inner_v, field, path))?;
    let central_v = get(obj, "central", path)?.clone();
    let central = with_seg!(path, "central", sigma_from_json(&central_v, field, path))?;
    Ok(DerivationVal {
        field,
        inner,
        central,
    })
}

/// Parses a `{"field": ..., "expr": ...}` document.
pub fn expr_from_document(v: &Value) -> JResult<(FieldId, MatExpr)> {
    let mut path = Vec::new();
    let path = &mut path;
    let obj = as_object(v, path)?;
    let field_text = str_at(obj, "field", path)?;
    let field = match field_from_str(field_text) {
        Some(f) => f,
        None => return with_seg!(path, "field", fail(path, "unknown field tag")),
    };
    let e = get(obj, "expr", path)?.clone();
    let expr = with_seg!(path, "expr", expr_from_json(&e, field, path))?;
    Ok((field, expr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use glcf_core::testkit::ExprGen;

    const Q: FieldId = FieldId::Rational;

    #[test]
    fn round_trip_fixture_expressions() {
        let mut gen = ExprGen::new(Q, 1234);
        let mut exprs = glcf_core::testkit::sample_fragment_exprs(Q);
        for _ in 0..60 {
            exprs.push(gen.fragment_expr(2));
        }
        exprs.push(MatExpr::SolveShift(Box::new(MatExpr::basis(1, 1))));
        for e in exprs {
            let v = expr_to_json(&e);
            let mut path = Vec::new();
            let back = expr_from_json(&v, Q, &mut path).unwrap();
            assert_eq!(e, back);
        }
    }

    #[test]
    fn unknown_kind_reports_pointer() {
        let v = serde_json::json!({
            "kind": "sum",
            "terms": [{"kind": "basis", "row": 1, "col": 2}, {"kind": "mystery"}],
        });
        let mut path = Vec::new();
        let err = expr_from_json(&v, Q, &mut path).unwrap_err();
        assert_eq!(err.pointer, "/terms/1/kind");
        assert!(err.msg.contains("mystery"));
    }

    #[test]
    fn bad_scalar_reports_pointer() {
        let v = serde_json::json!({"kind": "scalar", "value": "one half"});
        let mut path = Vec::new();
        let err = expr_from_json(&v, Q, &mut path).unwrap_err();
        assert_eq!(err.pointer, "/value");
    }

    #[test]
    fn chain_round_trip() {
        let d = MatExpr::Diag(glcf_core::testkit::periodic(Q, &[1], &[2]));
        let chain = glcf_core::witnesses::eij_from_diag(&d, Q, 1, 2).unwrap();
        let v = chain_to_json(&chain);
        let mut path = Vec::new();
        let back = chain_from_json(&v, &mut path).unwrap();
        assert_eq!(chain, back);
    }

    #[test]
    fn derivation_round_trip() {
        let mut val = DerivationVal::inner_only(Q, MatExpr::basis(1, 2));
        val.central.values.insert(2, Q.from_ratio(1, 3).unwrap());
        let v = derivation_to_json(&val);
        let mut path = Vec::new();
        let back = derivation_from_json(&v, &mut path).unwrap();
        assert_eq!(val, back);
    }

    #[test]
    fn zexpr_round_trip() {
        let e = ZMatExpr::Sum(vec![
            ZMatExpr::basis(-1, 2),
            ZMatExpr::Shift {
                offset: 2,
                rows: ZSet::all(),
                weights: ZSeq::constant(Q.from_i64(3)),
            },
        ]);
        let v = zexpr_to_json(&e);
        let mut path = Vec::new();
        let back = zexpr_from_json(&v, Q, &mut path).unwrap();
        assert_eq!(e, back);
    }

    #[test]
    fn field_tags() {
        assert_eq!(field_from_str("q"), Some(FieldId::Rational));
        assert_eq!(field_from_str("z"), Some(FieldId::Integer));
        assert_eq!(field_from_str("fp:5"), Some(FieldId::Prime(5)));
        assert_eq!(field_from_str("fp:6"), None);
        assert_eq!(field_from_str("fp:nope"), None);
    }
}
