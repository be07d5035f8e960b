use serde_json::{json, Map, Value};

use wco::calculus::{self, Calculus};
use wco::exact::ExactSpace;
use wco::family::{domain_perp_family, FamilyInstance};
use wco::gallery::GalleryItem;
use wco::properties::{self as props, CheckKind};
use wco::verdict::number;
use wco::PointSpace;

use crate::input::{CliError, Input, Number};

fn rational_pair(w: &Option<wco::exact::ExactComplex>) -> Value {
    match w {
        Some((re, im)) => json!([re.to_string(), im.to_string()]),
        None => Value::Null,
    }
}

pub fn on_space(space: &PointSpace, alpha: &Number, exact: bool) -> Result<Value, CliError> {
    let fail = |e: &dyn std::fmt::Display| CliError::Usage(e.to_string());
    let wa = calculus::aluthge_weight(space, alpha.value).map_err(|e| fail(&e))?;
    let rn = calculus::aluthge_rn(space, alpha.value).map_err(|e| fail(&e))?;
    let perp = props::aluthge_domain_perp(space, alpha.value).map_err(|e| fail(&e))?;
    let closed = props::aluthge_closed_criterion(space, alpha.value).map_err(|e| fail(&e))?;
    let mut out = Map::new();
    out.insert("alpha".into(), json!(alpha.text));
    out.insert("w_alpha".into(), wa.to_json(space));
    out.insert("aluthge_rn".into(), rn.to_json(space));
    out.insert("perp".into(), json!(perp));
    out.insert("closed_criterion".into(), closed.to_json());
    if exact {
        let e = ExactSpace::from_point_space(space).map_err(|e| fail(&e))?;
        // a null entry means (h/h o phi)^(a/2) is irrational there
        let map: Map<String, Value> =
            e.labels().iter().cloned().zip(e.aluthge_weight(&alpha.exact).iter().map(rational_pair)).collect();
        out.insert("w_alpha_exact".into(), Value::Object(map));
    }
    Ok(Value::Object(out))
}

pub fn on_family(inst: &FamilyInstance, window: u64, alpha: &Number) -> Result<Value, CliError> {
    let fail = |e: &dyn std::fmt::Display| CliError::Usage(e.to_string());
    let calc = Calculus::new(inst);
    let points = inst.window(window);
    let dense = props::densely_defined_on(&calc, &points);
    if dense.fails_p() {
        return Err(CliError::Usage(format!("not densely defined: {}", dense.details)));
    }
    let mut wa = Map::new();
    let mut rn = Map::new();
    for x in &points {
        let w = calc.aluthge_weight(x, alpha.value).map_err(|e| fail(&e))?;
        wa.insert(x.to_string(), json!([w.re, w.im]));
        rn.insert(x.to_string(), number(calc.aluthge_rn(x, alpha.value).get()));
    }
    let (perp, undecided) = domain_perp_family(inst, alpha.value, window).map_err(|e| fail(&e))?;
    let args = wco::family::CheckArgs { alpha: Some(alpha.value), ..Default::default() };
    let closed = wco::family::check_family(inst, CheckKind::ClosedCriterion, &args, window).map_err(|e| fail(&e))?;
    Ok(json!({
        "alpha": alpha.text,
        "window": window,
        "w_alpha": wa,
        "aluthge_rn": rn,
        "perp": perp.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "undecided": undecided.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "closed_criterion": closed.to_json(),
    }))
}

pub fn run(input: &Input, alpha: &Number, exact: bool) -> Result<Value, CliError> {
    let body = match input {
        Input::Space { space, .. } => on_space(space, alpha, exact)?,
        Input::Gallery { item: GalleryItem::Countable(f), window, .. } => on_family(f, *window, alpha)?,
        Input::Gallery { item: GalleryItem::Linear(_), .. } => {
            return Err(CliError::Usage("the analytic family has no point space; use `gallery build`".into()))
        }
        Input::Random { spaces, .. } => {
            let all: Result<Vec<Value>, CliError> = spaces.iter().map(|s| on_space(s, alpha, exact)).collect();
            Value::Array(all?)
        }
    };
    Ok(json!({"command": "aluthge", "input": input.describe(), "result": body}))
}
