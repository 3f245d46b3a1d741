//! Boolean condition language used by constraint and discovery rules.
//!
//! Variables are dotted paths looked up verbatim in a flat environment.
//! Evaluation is total: a comparison whose operands are missing or of
//! different kinds is simply false.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::xml::{Element, XmlWriter};

/// A scalar value held in an environment or a constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Bool(bool),
    Num(f64),
    Str(String),
}

impl Scalar {
    pub fn type_name(&self) -> &'static str {
        match self {
            Scalar::Bool(_) => "bool",
            Scalar::Num(_) => "num",
            Scalar::Str(_) => "str",
        }
    }

    /// Lexical form used inside `<const>` and `<attr>` elements.
    pub fn lexical(&self) -> String {
        match self {
            Scalar::Bool(b) => b.to_string(),
            Scalar::Num(n) => n.to_string(),
            Scalar::Str(s) => s.clone(),
        }
    }

    pub fn from_lexical(type_name: &str, text: &str) -> Result<Scalar> {
        match type_name {
            "bool" => match text.trim() {
                "true" => Ok(Scalar::Bool(true)),
                "false" => Ok(Scalar::Bool(false)),
                other => Err(Error::MalformedExpr(format!("`{other}` is not a boolean"))),
            },
            "num" => {
                let value: f64 = text
                    .trim()
                    .parse()
                    .map_err(|_| Error::MalformedExpr(format!("`{text}` is not a number")))?;
                if !value.is_finite() {
                    return Err(Error::MalformedExpr(format!("`{text}` is not finite")));
                }
                Ok(Scalar::Num(value))
            }
            "str" => Ok(Scalar::Str(text.to_string())),
            other => Err(Error::MalformedExpr(format!("unknown scalar type `{other}`"))),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Str(s) => write!(f, "{s:?}"),
            other => f.write_str(&other.lexical()),
        }
    }
}

impl From<bool> for Scalar {
    fn from(v: bool) -> Self {
        Scalar::Bool(v)
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::Num(v)
    }
}

impl From<&str> for Scalar {
    fn from(v: &str) -> Self {
        Scalar::Str(v.to_string())
    }
}

/// Flat environment keyed by dotted path.
pub type Env = BTreeMap<String, Scalar>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub const ALL: [CmpOp; 6] = [
        CmpOp::Eq,
        CmpOp::Ne,
        CmpOp::Lt,
        CmpOp::Le,
        CmpOp::Gt,
        CmpOp::Ge,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CmpOp::Eq => "eq",
            CmpOp::Ne => "ne",
            CmpOp::Lt => "lt",
            CmpOp::Le => "le",
            CmpOp::Gt => "gt",
            CmpOp::Ge => "ge",
        }
    }

    pub fn parse(s: &str) -> Result<CmpOp> {
        CmpOp::ALL
            .into_iter()
            .find(|op| op.as_str() == s)
            .ok_or_else(|| Error::MalformedExpr(format!("unknown comparison operator `{s}`")))
    }

    pub fn is_ordering(self) -> bool {
        !matches!(self, CmpOp::Eq | CmpOp::Ne)
    }

    fn apply(self, left: &Scalar, right: &Scalar) -> bool {
        use std::cmp::Ordering;
        let ordering = match (left, right) {
            (Scalar::Num(a), Scalar::Num(b)) => a.partial_cmp(b),
            (Scalar::Bool(a), Scalar::Bool(b)) if !self.is_ordering() => Some(a.cmp(b)),
            (Scalar::Str(a), Scalar::Str(b)) if !self.is_ordering() => Some(a.cmp(b)),
            _ => None,
        };
        match (self, ordering) {
            (_, None) => false,
            (CmpOp::Eq, Some(o)) => o == Ordering::Equal,
            (CmpOp::Ne, Some(o)) => o != Ordering::Equal,
            (CmpOp::Lt, Some(o)) => o == Ordering::Less,
            (CmpOp::Le, Some(o)) => o != Ordering::Greater,
            (CmpOp::Gt, Some(o)) => o == Ordering::Greater,
            (CmpOp::Ge, Some(o)) => o != Ordering::Less,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expr {
    Const(Scalar),
    Var(String),
    Compare {
        op: CmpOp,
        left: Box<Expr>,
        right: Box<Expr>,
    },
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Not(Box<Expr>),
}

impl Expr {
    pub fn constant(value: impl Into<Scalar>) -> Expr {
        Expr::Const(value.into())
    }

    pub fn var(path: impl Into<String>) -> Expr {
        Expr::Var(path.into())
    }

    pub fn cmp(op: CmpOp, left: Expr, right: Expr) -> Expr {
        Expr::Compare {
            op,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(inner: Expr) -> Expr {
        Expr::Not(Box::new(inner))
    }

    /// Checks the structural invariants: `and`/`or` arity, boolean-typed
    /// constants in condition position, ordering comparators on numbers only.
    pub fn validate(&self) -> Result<()> {
        self.validate_condition()
    }

    fn validate_condition(&self) -> Result<()> {
        match self {
            Expr::Const(Scalar::Bool(_)) => Ok(()),
            Expr::Const(other) => Err(Error::MalformedExpr(format!(
                "{} constant used as a condition",
                other.type_name()
            ))),
            Expr::Var(path) => validate_path(path),
            Expr::Compare { op, left, right } => {
                left.validate_operand(*op)?;
                right.validate_operand(*op)
            }
            Expr::And(children) | Expr::Or(children) => {
                if children.len() < 2 {
                    return Err(Error::MalformedExpr(
                        "and/or need at least two operands".into(),
                    ));
                }
                children.iter().try_for_each(Expr::validate_condition)
            }
            Expr::Not(inner) => inner.validate_condition(),
        }
    }

    fn validate_operand(&self, op: CmpOp) -> Result<()> {
        match self {
            Expr::Const(Scalar::Num(n)) if !n.is_finite() => {
                Err(Error::MalformedExpr("non-finite numeric constant".into()))
            }
            Expr::Const(Scalar::Num(_)) => Ok(()),
            Expr::Const(other) if op.is_ordering() => Err(Error::MalformedExpr(format!(
                "`{}` applied to a {} constant",
                op.as_str(),
                other.type_name()
            ))),
            Expr::Const(_) => Ok(()),
            Expr::Var(path) => validate_path(path),
            _ if op.is_ordering() => Err(Error::MalformedExpr(format!(
                "`{}` applied to a boolean sub-expression",
                op.as_str()
            ))),
            compound => compound.validate_condition(),
        }
    }

    /// Evaluates the expression as a condition. Total on well-formed input.
    pub fn eval(&self, env: &Env) -> bool {
        match self {
            Expr::Const(Scalar::Bool(b)) => *b,
            Expr::Const(_) => false,
            Expr::Var(path) => matches!(env.get(path), Some(Scalar::Bool(true))),
            Expr::Compare { op, left, right } => match (left.value(env), right.value(env)) {
                (Some(l), Some(r)) => op.apply(&l, &r),
                _ => false,
            },
            Expr::And(children) => children.iter().all(|c| c.eval(env)),
            Expr::Or(children) => children.iter().any(|c| c.eval(env)),
            Expr::Not(inner) => !inner.eval(env),
        }
    }

    fn value(&self, env: &Env) -> Option<Scalar> {
        match self {
            Expr::Const(v) => Some(v.clone()),
            Expr::Var(path) => env.get(path).cloned(),
            other => Some(Scalar::Bool(other.eval(env))),
        }
    }

    /// Every variable path mentioned, in first-occurrence order.
    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(path) => {
                if !out.contains(&path.as_str()) {
                    out.push(path);
                }
            }
            Expr::Compare { left, right, .. } => {
                left.collect_vars(out);
                right.collect_vars(out);
            }
            Expr::And(children) | Expr::Or(children) => {
                children.iter().for_each(|c| c.collect_vars(out))
            }
            Expr::Not(inner) => inner.collect_vars(out),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Compare { left, right, .. } => 1 + left.depth().max(right.depth()),
            Expr::And(children) | Expr::Or(children) => {
                1 + children.iter().map(Expr::depth).max().unwrap_or(0)
            }
            Expr::Not(inner) => 1 + inner.depth(),
        }
    }

    /// Parses an expression element (`const`, `var`, `cmp`, `and`, `or`, `not`)
    /// and validates it.
    pub fn from_element(element: &Element) -> Result<Expr> {
        let expr = read_expr(element)?;
        expr.validate()?;
        Ok(expr)
    }

    pub fn write_xml(&self, w: &mut XmlWriter) {
        match self {
            Expr::Const(v) => w.text_element("const", &[("type", v.type_name())], &v.lexical()),
            Expr::Var(path) => w.empty("var", &[("path", path)]),
            Expr::Compare { op, left, right } => {
                w.open("cmp", &[("op", op.as_str())]);
                left.write_xml(w);
                right.write_xml(w);
                w.close("cmp");
            }
            Expr::And(children) | Expr::Or(children) => {
                let name = if matches!(self, Expr::And(_)) { "and" } else { "or" };
                w.open(name, &[]);
                children.iter().for_each(|c| c.write_xml(w));
                w.close(name);
            }
            Expr::Not(inner) => {
                w.open("not", &[]);
                inner.write_xml(w);
                w.close("not");
            }
        }
    }
}

fn validate_path(path: &str) -> Result<()> {
    if path.is_empty() || path.split('.').any(str::is_empty) {
        return Err(Error::MalformedExpr(format!("invalid variable path `{path}`")));
    }
    Ok(())
}

fn read_expr(element: &Element) -> Result<Expr> {
    match element.name.as_str() {
        "const" => {
            if !element.children.is_empty() {
                return Err(Error::MalformedExpr("<const> cannot have children".into()));
            }
            let type_name = element.required("type")?;
            Ok(Expr::Const(Scalar::from_lexical(type_name, &element.text)?))
        }
        "var" => {
            element.expect_no_text()?;
            Ok(Expr::Var(element.required("path")?.to_string()))
        }
        "cmp" => {
            element.expect_no_text()?;
            let op = CmpOp::parse(element.required("op")?)?;
            match element.children.as_slice() {
                [left, right] => Ok(Expr::cmp(op, read_expr(left)?, read_expr(right)?)),
                _ => Err(Error::MalformedExpr("<cmp> needs exactly two operands".into())),
            }
        }
        "and" | "or" => {
            element.expect_no_text()?;
            let children = element
                .children
                .iter()
                .map(read_expr)
                .collect::<Result<Vec<_>>>()?;
            Ok(if element.name == "and" {
                Expr::And(children)
            } else {
                Expr::Or(children)
            })
        }
        "not" => {
            element.expect_no_text()?;
            match element.children.as_slice() {
                [inner] => Ok(Expr::not(read_expr(inner)?)),
                _ => Err(Error::MalformedExpr("<not> needs exactly one operand".into())),
            }
        }
        other => Err(Error::UnknownElement(other.to_string())),
    }
}

/// Reads the single expression wrapped by a `<condition>`/`<predicate>` element.
pub(crate) fn read_wrapped(element: &Element) -> Result<Expr> {
    element.expect_no_text()?;
    match element.children.as_slice() {
        [inner] => Expr::from_element(inner),
        _ => Err(Error::MalformedExpr(format!(
            "<{}> must contain exactly one expression",
            element.name
        ))),
    }
}

pub(crate) fn write_wrapped(w: &mut XmlWriter, name: &str, expr: &Expr) {
    w.open(name, &[]);
    expr.write_xml(w);
    w.close(name);
}

/// Reads `<attr path=".." type="..">value</attr>` children into an environment.
pub fn read_attr_map(element: &Element) -> Result<Env> {
    let mut env = Env::new();
    for child in &element.children {
        if child.name != "attr" {
            return Err(Error::UnknownElement(child.name.clone()));
        }
        let path = child.required("path")?;
        validate_path(path)?;
        let value = Scalar::from_lexical(child.required("type")?, &child.text)?;
        env.insert(path.to_string(), value);
    }
    Ok(env)
}

pub fn write_attr_map(w: &mut XmlWriter, env: &Env) {
    for (path, value) in env {
        w.text_element(
            "attr",
            &[("path", path), ("type", value.type_name())],
            &value.lexical(),
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::xml::parse_document;

    fn env(pairs: &[(&str, Scalar)]) -> Env {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect()
    }

    #[test]
    fn valid_order_notifies_customer() {
        let e = Expr::cmp(CmpOp::Eq, Expr::var("order.valid"), Expr::constant(true));
        assert!(e.eval(&env(&[("order.valid", Scalar::Bool(true))])));
        assert!(!e.eval(&env(&[("order.valid", Scalar::Bool(false))])));
    }

    #[test]
    fn constant_true_on_empty_env() {
        assert!(Expr::constant(true).eval(&Env::new()));
    }

    #[test]
    fn unresolved_and_mismatched_comparisons_are_false() {
        let ge = Expr::cmp(CmpOp::Ge, Expr::var("a"), Expr::constant(1.0));
        assert!(!ge.eval(&Env::new()));
        assert!(!ge.eval(&env(&[("a", Scalar::from("x"))])));
        let ne = Expr::cmp(CmpOp::Ne, Expr::var("a"), Expr::constant(1.0));
        assert!(!ne.eval(&env(&[("a", Scalar::Bool(true))])));
        assert!(Expr::not(ne.clone()).eval(&env(&[("a", Scalar::Bool(true))])));
        // ordering on two string variables is false, not an error
        let lt = Expr::cmp(CmpOp::Lt, Expr::var("a"), Expr::var("b"));
        assert!(!lt.eval(&env(&[("a", "x".into()), ("b", "y".into())])));
    }

    #[test]
    fn validation_rejects_malformed_shapes() {
        assert!(Expr::And(vec![Expr::constant(true)]).validate().is_err());
        assert!(Expr::Or(vec![]).validate().is_err());
        assert!(Expr::constant(3.0).validate().is_err());
        assert!(Expr::cmp(CmpOp::Lt, Expr::var("a"), Expr::constant("z"))
            .validate()
            .is_err());
        assert!(Expr::cmp(CmpOp::Eq, Expr::var("a"), Expr::constant("z"))
            .validate()
            .is_ok());
        assert!(Expr::var("a..b").validate().is_err());
    }

    #[test]
    fn xml_forms_parse() {
        let doc = parse_document(
            r#"<and>
                 <cmp op="le"><var path="fulfillmentHours"/><const type="num">2</const></cmp>
                 <not><var path="blocked"/></not>
               </and>"#,
        )
        .unwrap();
        let e = Expr::from_element(&doc).unwrap();
        assert!(e.eval(&env(&[("fulfillmentHours", Scalar::Num(1.0))])));
        assert!(!e.eval(&env(&[
            ("fulfillmentHours", Scalar::Num(1.0)),
            ("blocked", Scalar::Bool(true))
        ])));
        assert!(matches!(
            Expr::from_element(&parse_document("<xor/>").unwrap()),
            Err(Error::UnknownElement(_))
        ));
        assert!(matches!(
            Expr::from_element(&parse_document("<cmp op=\"eq\"><var path=\"a\"/></cmp>").unwrap()),
            Err(Error::MalformedExpr(_))
        ));
    }

    #[test]
    fn string_constants_keep_whitespace() {
        let doc = parse_document("<const type=\"str\">  a b </const>").unwrap();
        assert_eq!(
            read_expr(&doc).unwrap(),
            Expr::Const(Scalar::Str("  a b ".into()))
        );
    }
}
