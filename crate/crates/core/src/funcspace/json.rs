//! Descriptor JSON documents, one descriptor per document:
//!
//! ```text
//! {"kind":"trig_poly","terms":[{"freq":[..],"re":[..],"im":[..]}]}
//! {"kind":"series","name":"<corpus-name>","trunc":N}
//! {"kind":"scalar_composed","map":"sign|abs|arctan|identity|power:a","inner":{..}}
//! {"kind":"tabulated","xs":[..],"values":[{"re":[..],"im":[..]}]}
//! {"kind":"translated","shift":[..],"inner":{..}}
//! {"kind":"modulated","freq":[..],"inner":{..}}
//! {"kind":"combination","parts":[{"re":x,"im":y,"fn":{..}}]}
//! {"kind":"kernel_transform","kernel":{..},"inner":{..}}
//! ```
//!
//! Any document may carry `"domain":{"lo":[..],"hi":[..]}` to restrict to a box.

use serde_json::{json, Map, Value as Json};

use super::{
    compose_scalar, translate, ClosedForm, Domain, FunctionDescriptor, Node, ScalarMap, ScalarMapFamily, TrigPolynomial,
    TrigTerm, Value, Window, C64,
};
use crate::convops::{ConvOptions, Kernel, KernelTransform, TransformMode};
use crate::error::{MetapError, Result};

fn bad(msg: impl Into<String>) -> MetapError {
    MetapError::Malformed(msg.into())
}

fn field<'a>(obj: &'a Map<String, Json>, key: &str) -> Result<&'a Json> {
    obj.get(key).ok_or_else(|| bad(format!("missing field `{key}`")))
}

fn floats(v: &Json, what: &str) -> Result<Vec<f64>> {
    let arr = v.as_array().ok_or_else(|| bad(format!("`{what}` must be an array of numbers")))?;
    arr.iter()
        .map(|x| x.as_f64().ok_or_else(|| bad(format!("`{what}` must contain only numbers"))))
        .collect()
}

fn complex_vec(obj: &Map<String, Json>, what: &str) -> Result<Value> {
    let re = floats(field(obj, "re")?, "re")?;
    let im = match obj.get("im") {
        Some(v) => floats(v, "im")?,
        None => vec![0.0; re.len()],
    };
    if re.len() != im.len() || re.is_empty() {
        return Err(bad(format!("{what}: `re` and `im` must be non-empty and of equal length")));
    }
    Ok(re.into_iter().zip(im).map(|(a, b)| C64::new(a, b)).collect())
}

fn parse_map(v: &Json) -> Result<ScalarMap> {
    match v {
        Json::String(s) => ScalarMap::parse(s).map_err(|e| bad(e.to_string())),
        Json::Object(o) => {
            let xs = floats(field(o, "xs")?, "xs")?;
            let ys = floats(field(o, "ys")?, "ys")?;
            ScalarMap::table(xs, ys).map_err(|e| bad(e.to_string()))
        }
        _ => Err(bad("`map` must be a name or a {xs, ys} table")),
    }
}

fn parse_node(v: &Json) -> Result<FunctionDescriptor> {
    let obj = v.as_object().ok_or_else(|| bad("descriptor must be a JSON object"))?;
    let kind = field(obj, "kind")?.as_str().ok_or_else(|| bad("`kind` must be a string"))?;
    let inner = || parse_node(field(obj, "inner")?);
    let desc = match kind {
        "trig_poly" => {
            let terms = field(obj, "terms")?.as_array().ok_or_else(|| bad("`terms` must be an array"))?;
            let mut out = Vec::with_capacity(terms.len());
            for t in terms {
                let t = t.as_object().ok_or_else(|| bad("term must be an object"))?;
                let freq = floats(field(t, "freq")?, "freq")?;
                out.push(TrigTerm { freq, coef: complex_vec(t, "term")? });
            }
            let dim = obj
                .get("dim")
                .and_then(Json::as_u64)
                .map(|d| d as usize)
                .or_else(|| out.first().map(|t| t.freq.len()))
                .unwrap_or(1);
            let codim = out.first().map(|t| t.coef.len()).unwrap_or(1);
            FunctionDescriptor::trig(TrigPolynomial::new(dim, codim, out).map_err(|e| bad(e.to_string()))?)
        }
        "series" => {
            let name = field(obj, "name")?.as_str().ok_or_else(|| bad("`name` must be a string"))?;
            let trunc = match obj.get("trunc") {
                Some(t) => Some(t.as_u64().ok_or_else(|| bad("`trunc` must be a non-negative integer"))? as usize),
                None => None,
            };
            let s = obj.get("s").map(|s| s.as_f64().ok_or_else(|| bad("`s` must be a number"))).transpose()?;
            let entry = crate::corpus::corpus_get_with(name, trunc, s)?;
            entry.descriptor
        }
        "scalar_composed" => compose_scalar(&inner()?, &parse_map(field(obj, "map")?)?),
        "tabulated" => {
            let xs = floats(field(obj, "xs")?, "xs")?;
            let vals = field(obj, "values")?.as_array().ok_or_else(|| bad("`values` must be an array"))?;
            let values = vals
                .iter()
                .map(|v| complex_vec(v.as_object().ok_or_else(|| bad("value must be an object"))?, "value"))
                .collect::<Result<Vec<_>>>()?;
            FunctionDescriptor::tabulated(xs, values).map_err(|e| bad(e.to_string()))?
        }
        "translated" => translate(&inner()?, &floats(field(obj, "shift")?, "shift")?)?,
        "modulated" => inner()?.modulate(&floats(field(obj, "freq")?, "freq")?)?,
        "combination" => {
            let parts = field(obj, "parts")?.as_array().ok_or_else(|| bad("`parts` must be an array"))?;
            let parts = parts
                .iter()
                .map(|p| {
                    let p = p.as_object().ok_or_else(|| bad("part must be an object"))?;
                    let re = field(p, "re")?.as_f64().ok_or_else(|| bad("`re` must be a number"))?;
                    let im = p.get("im").and_then(Json::as_f64).unwrap_or(0.0);
                    Ok((C64::new(re, im), parse_node(field(p, "fn")?)?))
                })
                .collect::<Result<Vec<_>>>()?;
            FunctionDescriptor::linear_combination(parts)?
        }
        "kernel_transform" => {
            let kernel: Kernel = serde_json::from_value(field(obj, "kernel")?.clone())?;
            let mode = if matches!(kernel, Kernel::Heat { .. }) && obj.get("mode").and_then(Json::as_str) != Some("one_sided") {
                TransformMode::Whole
            } else {
                TransformMode::OneSided
            };
            FunctionDescriptor::kernel_transform(KernelTransform::new(kernel, inner()?, ConvOptions::default(), mode)?)
        }
        other => return Err(bad(format!("unknown kind `{other}`"))),
    };
    match obj.get("domain") {
        Some(d) => {
            let d = d.as_object().ok_or_else(|| bad("`domain` must be an object"))?;
            let w = Window::new(floats(field(d, "lo")?, "lo")?, floats(field(d, "hi")?, "hi")?)?;
            desc.restrict(&w)
        }
        None => Ok(desc),
    }
}

/// Parses a descriptor document.
pub fn descriptor_from_json(text: &str) -> Result<FunctionDescriptor> {
    let v: Json = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    parse_node(&v)
}

fn complex_json(v: &Value) -> Json {
    json!({
        "re": v.iter().map(|c| c.re).collect::<Vec<_>>(),
        "im": v.iter().map(|c| c.im).collect::<Vec<_>>(),
    })
}

fn map_json(m: &ScalarMap) -> Json {
    match &m.family {
        ScalarMapFamily::Identity => json!("identity"),
        ScalarMapFamily::Abs => json!("abs"),
        ScalarMapFamily::Sign => json!("sign"),
        ScalarMapFamily::Arctan => json!("arctan"),
        ScalarMapFamily::Power { alpha } => json!(format!("power:{alpha}")),
        ScalarMapFamily::MonotoneTable { xs, ys } => json!({ "xs": xs, "ys": ys }),
    }
}

fn node_json(f: &FunctionDescriptor) -> Result<Json> {
    let mut out = match f.node() {
        Node::TrigPoly(p) => json!({
            "kind": "trig_poly",
            "dim": p.dim(),
            "terms": p.terms().iter().map(|t| {
                let mut o = complex_json(&t.coef);
                o["freq"] = json!(t.freq);
                o
            }).collect::<Vec<_>>(),
        }),
        Node::Series { family, trunc } => {
            let mut o = json!({ "kind": "series", "name": family.name(), "trunc": trunc });
            if let super::SeriesFamily::Gevrey { s } = family {
                o["s"] = json!(s);
            }
            o
        }
        Node::Closed(c) => match c {
            ClosedForm::GevreyBlock { s, n } => json!({ "kind": "series", "name": c.name(), "trunc": n, "s": s }),
            ClosedForm::Zeta => return Err(MetapError::Unsupported("zeta has no corpus name".into())),
            _ => json!({ "kind": "series", "name": c.name() }),
        },
        Node::KernelTransform(k) => json!({
            "kind": "kernel_transform",
            "kernel": serde_json::to_value(&k.kernel)?,
            "mode": match k.mode { TransformMode::OneSided => "one_sided", TransformMode::Whole => "whole" },
            "inner": node_json(&k.inner)?,
        }),
        Node::ScalarComposed { map, inner } => json!({
            "kind": "scalar_composed",
            "map": map_json(map),
            "inner": node_json(inner)?,
        }),
        Node::Tabulated { xs, values } => json!({
            "kind": "tabulated",
            "xs": xs.as_slice(),
            "values": values.iter().map(complex_json).collect::<Vec<_>>(),
        }),
        Node::Translated { shift, inner } => json!({ "kind": "translated", "shift": shift, "inner": node_json(inner)? }),
        Node::Modulated { freq, inner } => json!({ "kind": "modulated", "freq": freq, "inner": node_json(inner)? }),
        Node::Combination(parts) => json!({
            "kind": "combination",
            "parts": parts.iter().map(|(c, g)| Ok(json!({ "re": c.re, "im": c.im, "fn": node_json(g)? }))).collect::<Result<Vec<_>>>()?,
        }),
        Node::Custom { name, .. } => return Err(MetapError::Unsupported(format!("custom function `{name}` has no JSON form"))),
    };
    if let (Domain::Box { window }, false) = (f.domain(), matches!(f.node(), Node::Tabulated { .. })) {
        out["domain"] = json!({ "lo": window.lo, "hi": window.hi });
    }
    Ok(out)
}

/// Serialises a descriptor; custom closures have no JSON form.
pub fn descriptor_to_json(f: &FunctionDescriptor) -> Result<String> {
    Ok(serde_json::to_string(&node_json(f)?)?)
}
