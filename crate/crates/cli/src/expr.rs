//! Boundary data and model functions given as expressions in `x1`, `x2`.

use std::fmt;

use barrierlab::Point2;
use evalexpr::{ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Node, Value};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Parsed expression. Functions use the `math::` prefix of evalexpr
/// (`math::sin(x1)`, `math::exp(x2)`, `math::sqrt(...)`); `^` is the power and
/// `pi` is predefined.
#[derive(Clone)]
pub struct Expr {
    src: String,
    tree: Node<DefaultNumericTypes>,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self, String> {
        let tree = evalexpr::build_operator_tree::<DefaultNumericTypes>(src).map_err(|e| format!("expression `{src}`: {e}"))?;
        let e = Self { src: src.to_string(), tree };
        // Catch unknown identifiers and non-numeric results at load time.
        e.try_eval(Point2::new(0.25, 0.5)).map_err(|m| format!("expression `{src}`: {m}"))?;
        Ok(e)
    }

    pub fn source(&self) -> &str {
        &self.src
    }

    fn try_eval(&self, x: Point2) -> Result<f64, String> {
        let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
        for (k, v) in [("x1", x.x), ("x2", x.y), ("pi", std::f64::consts::PI)] {
            ctx.set_value(k.into(), Value::Float(v)).map_err(|e| e.to_string())?;
        }
        self.tree.eval_number_with_context(&ctx).map_err(|e| e.to_string())
    }

    /// Evaluation failures after a successful parse become NaN.
    pub fn eval(&self, x: Point2) -> f64 {
        self.try_eval(x).unwrap_or(f64::NAN)
    }

    pub fn func(&self) -> impl Fn(Point2) -> f64 + '_ {
        move |x| self.eval(x)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.src)
    }
}

impl PartialEq for Expr {
    fn eq(&self, o: &Self) -> bool {
        self.src == o.src
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.src)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Expr::parse(&s).map_err(serde::de::Error::custom)
    }
}
