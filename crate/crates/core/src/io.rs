//! JSON documents for effects, states, observables, instruments, models and
//! stochastic matrices.
//!
//! Complex entries are `[re, im]` pairs and matrices are row-major arrays of
//! rows. The canonical writer sorts object keys and prints every float with 17
//! significant digits, so that loading and re-saving a canonical file gives the
//! same bytes.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{Map, Value, json};

use crate::effects::{Effect, State};
use crate::instruments::{Instrument, Operation};
use crate::label::Label;
use crate::models::{Fimm, Interaction};
use crate::observables::{Observable, StochasticMatrix};
use crate::{C64, CMatrix, Error, Result};

/// Any object a document can hold.
#[derive(Debug, Clone, PartialEq)]
pub enum Object {
    Effect(Effect),
    State(State),
    Observable(Observable),
    Instrument(Instrument),
    Fimm(Fimm),
    Stochastic(StochasticMatrix),
    Probability(f64),
}

impl Object {
    pub fn kind(&self) -> &'static str {
        match self {
            Object::Effect(_) => "effect",
            Object::State(_) => "state",
            Object::Observable(_) => "observable",
            Object::Instrument(_) => "instrument",
            Object::Fimm(_) => "fimm",
            Object::Stochastic(_) => "stochastic",
            Object::Probability(_) => "probability",
        }
    }

    pub fn to_value(&self) -> Value {
        let mut doc = match self {
            Object::Effect(e) => json!({ "dim": e.dim(), "matrix": matrix_value(e.matrix()) }),
            Object::State(s) => json!({ "dim": s.dim(), "matrix": matrix_value(s.matrix()) }),
            Object::Observable(a) => {
                let mut v = observable_body(a);
                v["dim"] = json!(a.dim());
                v
            }
            Object::Instrument(i) => json!({
                "dim": i.dim(),
                "labels": labels_value(i.labels()),
                "operations": i.operations().map(|op| json!({ "choi": matrix_value(op.choi()) })).collect::<Vec<_>>(),
            }),
            Object::Fimm(m) => {
                let interaction = match m.interaction() {
                    Interaction::Unitary(u) => json!({ "unitary": matrix_value(u) }),
                    Interaction::Kraus(ops) => json!({ "kraus": ops.iter().map(matrix_value).collect::<Vec<_>>() }),
                };
                json!({
                    "dim": m.dim_h(),
                    "dim_k": m.dim_k(),
                    "eta": matrix_value(m.eta().matrix()),
                    "interaction": interaction,
                    "pointer": observable_body(m.pointer()),
                })
            }
            Object::Stochastic(nu) => json!({
                "sources": labels_value(nu.sources().iter()),
                "targets": labels_value(nu.targets().iter()),
                "rows": nu.rows(),
            }),
            Object::Probability(p) => json!({ "value": p }),
        };
        doc["kind"] = json!(self.kind());
        doc
    }

    pub fn from_value(v: &Value) -> Result<Self> {
        let kind = field(v, "kind")?.as_str().ok_or_else(|| parse_err("`kind` must be a string"))?;
        let obj = match kind {
            "effect" => {
                let m = read_square(field(v, "matrix")?, read_dim(v)?)?;
                Object::Effect(Effect::from_matrix(m)?)
            }
            "state" => {
                let m = read_square(field(v, "matrix")?, read_dim(v)?)?;
                Object::State(State::from_matrix(m)?)
            }
            "observable" => Object::Observable(read_observable(v, read_dim(v)?)?),
            "instrument" => Object::Instrument(read_instrument(v)?),
            "fimm" => Object::Fimm(read_fimm(v)?),
            "stochastic" => {
                let sources = read_labels(field(v, "sources")?)?;
                let targets = read_labels(field(v, "targets")?)?;
                let rows = field(v, "rows")?
                    .as_array()
                    .ok_or_else(|| parse_err("`rows` must be an array"))?
                    .iter()
                    .map(read_reals)
                    .collect::<Result<Vec<_>>>()?;
                Object::Stochastic(StochasticMatrix::new(sources, targets, rows)?)
            }
            "probability" => Object::Probability(read_real(field(v, "value")?)?),
            other => return Err(parse_err(format!("unknown kind `{other}`"))),
        };
        Ok(obj)
    }
}

/// Canonical text of a document: sorted keys, two-space indent, floats with 17
/// significant digits, arrays of scalars on one line.
pub fn to_canonical_string(obj: &Object) -> String {
    let mut out = String::new();
    write_value(&mut out, &obj.to_value(), 0);
    out.push('\n');
    out
}

pub fn from_str(text: &str) -> Result<Object> {
    let v: Value = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    Object::from_value(&v)
}

pub fn load(path: impl AsRef<Path>) -> Result<Object> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    from_str(&text)
}

pub fn save(obj: &Object, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_canonical_string(obj)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| parse_err(format!("missing field `{key}`")))
}

fn complex_value(z: C64) -> Value {
    json!([z.re, z.im])
}

fn matrix_value(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array(m.row(i).iter().map(|&z| complex_value(z)).collect()))
            .collect(),
    )
}

fn labels_value<'a>(labels: impl Iterator<Item = &'a Label>) -> Value {
    Value::Array(labels.map(|l| Value::String(l.to_string())).collect())
}

fn observable_body(a: &Observable) -> Value {
    json!({
        "labels": labels_value(a.labels()),
        "effects": a.effects().map(|e| matrix_value(e.matrix())).collect::<Vec<_>>(),
    })
}

fn read_dim(v: &Value) -> Result<usize> {
    let d = field(v, "dim")?.as_u64().ok_or_else(|| parse_err("`dim` must be a positive integer"))?;
    if d == 0 {
        return Err(parse_err("`dim` must be a positive integer"));
    }
    Ok(d as usize)
}

fn read_real(v: &Value) -> Result<f64> {
    let x = v.as_f64().ok_or_else(|| parse_err(format!("expected a number, found {v}")))?;
    if !x.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(x)
}

fn read_reals(v: &Value) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| parse_err("expected an array of numbers"))?
        .iter()
        .map(read_real)
        .collect()
}

fn read_complex(v: &Value) -> Result<C64> {
    match v {
        Value::Array(pair) if pair.len() == 2 => Ok(C64::new(read_real(&pair[0])?, read_real(&pair[1])?)),
        Value::Number(_) => Ok(C64::new(read_real(v)?, 0.0)),
        _ => Err(parse_err(format!("expected a complex entry [re, im], found {v}"))),
    }
}

fn read_matrix(v: &Value) -> Result<CMatrix> {
    let rows = v.as_array().ok_or_else(|| parse_err("matrix must be an array of rows"))?;
    let rows = rows
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| parse_err("matrix row must be an array"))?
                .iter()
                .map(read_complex)
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    CMatrix::from_rows(rows)
}

fn read_square(v: &Value, dim: usize) -> Result<CMatrix> {
    let m = read_matrix(v)?;
    if m.shape() != (dim, dim) {
        return Err(Error::Dimension(format!("expected a {dim}×{dim} matrix, found {}×{}", m.rows(), m.cols())));
    }
    Ok(m)
}

fn read_labels(v: &Value) -> Result<Vec<Label>> {
    v.as_array()
        .ok_or_else(|| parse_err("`labels` must be an array"))?
        .iter()
        .map(|l| l.as_str().map(Label::parse).ok_or_else(|| parse_err("labels must be strings")))
        .collect()
}

fn read_observable(v: &Value, dim: usize) -> Result<Observable> {
    let labels = read_labels(field(v, "labels")?)?;
    let effects = field(v, "effects")?.as_array().ok_or_else(|| parse_err("`effects` must be an array"))?;
    if effects.len() != labels.len() {
        return Err(parse_err(format!("{} labels for {} effects", labels.len(), effects.len())));
    }
    let outcomes = labels
        .into_iter()
        .zip(effects)
        .map(|(l, e)| Ok((l, Effect::from_matrix(read_square(e, dim)?)?)))
        .collect::<Result<Vec<_>>>()?;
    Observable::new(outcomes)
}

fn read_instrument(v: &Value) -> Result<Instrument> {
    let dim = read_dim(v)?;
    let labels = read_labels(field(v, "labels")?)?;
    let ops = field(v, "operations")?.as_array().ok_or_else(|| parse_err("`operations` must be an array"))?;
    if ops.len() != labels.len() {
        return Err(parse_err(format!("{} labels for {} operations", labels.len(), ops.len())));
    }
    let mut outcomes = Vec::with_capacity(ops.len());
    for (label, op) in labels.into_iter().zip(ops) {
        let operation = if let Some(c) = op.get("choi") {
            let choi = crate::HMatrix::new(read_square(c, dim * dim)?)?;
            Operation::from_choi(dim, choi)?
        } else if let Some(k) = op.get("kraus") {
            let kraus = k
                .as_array()
                .ok_or_else(|| parse_err("`kraus` must be an array of matrices"))?
                .iter()
                .map(|m| read_square(m, dim))
                .collect::<Result<Vec<_>>>()?;
            Operation::from_kraus(kraus)?
        } else {
            return Err(parse_err("operation needs `choi` or `kraus`"));
        };
        outcomes.push((label, operation));
    }
    Instrument::new(outcomes)
}

fn read_fimm(v: &Value) -> Result<Fimm> {
    let dim_h = read_dim(v)?;
    let dim_k = field(v, "dim_k")?.as_u64().ok_or_else(|| parse_err("`dim_k` must be a positive integer"))? as usize;
    let eta = State::from_matrix(read_square(field(v, "eta")?, dim_k)?)?;
    let inter = field(v, "interaction")?;
    let n = dim_h * dim_k;
    let nu = if let Some(u) = inter.get("unitary") {
        Interaction::unitary(read_square(u, n)?)?
    } else if let Some(k) = inter.get("kraus") {
        let ops = k
            .as_array()
            .ok_or_else(|| parse_err("`kraus` must be an array of matrices"))?
            .iter()
            .map(|m| read_square(m, n))
            .collect::<Result<Vec<_>>>()?;
        Interaction::kraus(ops)?
    } else {
        return Err(parse_err("interaction needs `unitary` or `kraus`"));
    };
    let pointer = read_observable(field(v, "pointer")?, dim_k)?;
    Fimm::new(dim_h, eta, nu, pointer)
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&v.to_string()),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => write!(out, "{u}").unwrap(),
            (None, Some(i)) => write!(out, "{i}").unwrap(),
            _ => write_float(out, n.as_f64().unwrap_or(f64::NAN)),
        },
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
            } else if items.iter().all(is_inline) {
                out.push('[');
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, item, indent);
                }
                out.push(']');
            } else {
                out.push_str("[\n");
                for (k, item) in items.iter().enumerate() {
                    pad(out, indent + 1);
                    write_value(out, item, indent + 1);
                    out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
                }
                pad(out, indent);
                out.push(']');
            }
        }
        Value::Object(map) => write_object(out, map, indent),
    }
}

fn write_object(out: &mut String, map: &Map<String, Value>, indent: usize) {
    let mut keys: Vec<&String> = map.keys().collect();
    keys.sort();
    out.push_str("{\n");
    for (k, key) in keys.iter().enumerate() {
        pad(out, indent + 1);
        out.push_str(&Value::String((*key).clone()).to_string());
        out.push_str(": ");
        write_value(out, &map[*key], indent + 1);
        out.push_str(if k + 1 < keys.len() { ",\n" } else { "\n" });
    }
    pad(out, indent);
    out.push('}');
}

// A complex pair is written inline; so is a list of labels.
fn is_inline(v: &Value) -> bool {
    match v {
        Value::Array(items) => items.iter().all(|x| x.is_number()),
        Value::Object(_) => false,
        _ => true,
    }
}

fn write_float(out: &mut String, x: f64) {
    // -0.0 prints as "-0.0000000000000000e0"; normalize so that re-saving is stable.
    let x = if x == 0.0 { 0.0 } else { x };
    write!(out, "{x:.16e}").unwrap();
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instruments::luders_instrument;
    use crate::random::{random_instrument, random_observable, random_state, seeded};

    fn roundtrip(obj: &Object) -> Object {
        let text = to_canonical_string(obj);
        let back = from_str(&text).unwrap();
        assert_eq!(to_canonical_string(&back), text);
        back
    }

    #[test]
    fn effect_from_plain_numbers() {
        let obj = from_str(r#"{"kind":"effect","dim":2,"matrix":[[1,0],[0,0]]}"#).unwrap();
        let Object::Effect(e) = obj else { panic!("wrong kind") };
        assert_eq!(e.matrix()[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(e.matrix()[(1, 1)], C64::new(0.0, 0.0));
    }

    #[test]
    fn observable_sum_violation_is_named() {
        let text = r#"{"kind":"observable","dim":2,"labels":["0","1"],
            "effects":[[[1,0],[0,0]],[[0,0],[0,0.9]]]}"#;
        match from_str(text) {
            Err(Error::Invariant { invariant, residual }) => {
                assert_eq!(invariant, "sum-to-identity");
                assert!((residual - 0.1).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn kraus_instrument_file_is_luders_z() {
        let text = r#"{"kind":"instrument","dim":2,"labels":["0","1"],"operations":[
            {"kraus":[[[1,0],[0,0]]]},{"kraus":[[[0,0],[0,1]]]}]}"#;
        let Object::Instrument(i) = from_str(text).unwrap() else { panic!("wrong kind") };
        let z = Observable::from_basis(&CMatrix::identity(2)).unwrap();
        assert!(i.close_to(&luders_instrument(&z), 1e-12));
    }

    #[test]
    fn random_objects_roundtrip() {
        let mut rng = seeded(3);
        let a = random_observable(&mut rng, 3, 4);
        let Object::Observable(b) = roundtrip(&Object::Observable(a.clone())) else { panic!() };
        assert!(a.close_to(&b, 1e-12));
        let i = random_instrument(&mut rng, 2, 3);
        let Object::Instrument(j) = roundtrip(&Object::Instrument(i.clone())) else { panic!() };
        assert!(i.close_to(&j, 1e-12));
        let rho = random_state(&mut rng, 4);
        let Object::State(sigma) = roundtrip(&Object::State(rho.clone())) else { panic!() };
        assert!(rho.matrix().distance(sigma.matrix()).unwrap() < 1e-12);
        roundtrip(&Object::Probability(0.25));
    }

    #[test]
    fn rejects_unknown_kind() {
        assert!(matches!(from_str(r#"{"kind":"banana"}"#), Err(Error::Parse(_))));
    }
}
