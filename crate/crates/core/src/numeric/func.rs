use std::fmt;
use std::sync::Arc;

use super::value::{Space, Value};
use super::NumericError;

type Evaluator = dyn Fn(&[Value]) -> Result<Value, NumericError> + Send + Sync;
type ExactDifferential = dyn Fn(&[Value], &[(usize, Value)]) -> Option<Value> + Send + Sync;

/// An executable function on concrete spaces.
///
/// The optional exact differential receives the argument tuple and a list of
/// `(slot, direction)` pairs (slots are 1-based) and returns the mixed
/// differential of that order, or `None` when the order is not available.
#[derive(Clone)]
pub struct ConcreteFunc {
    name: String,
    domain: Vec<Space>,
    codomain: Space,
    eval: Arc<Evaluator>,
    exact: Option<Arc<ExactDifferential>>,
}

impl ConcreteFunc {
    pub fn new(
        name: impl Into<String>,
        domain: Vec<Space>,
        codomain: Space,
        eval: impl Fn(&[Value]) -> Result<Value, NumericError> + Send + Sync + 'static,
    ) -> Self {
        ConcreteFunc {
            name: name.into(),
            domain,
            codomain,
            eval: Arc::new(eval),
            exact: None,
        }
    }

    /// Univariate convenience constructor for total evaluators.
    pub fn unary(
        name: impl Into<String>,
        domain: Space,
        codomain: Space,
        eval: impl Fn(&Value) -> Value + Send + Sync + 'static,
    ) -> Self {
        Self::new(name, vec![domain], codomain, move |args| Ok(eval(&args[0])))
    }

    pub fn with_exact_differential(
        mut self,
        exact: impl Fn(&[Value], &[(usize, Value)]) -> Option<Value> + Send + Sync + 'static,
    ) -> Self {
        self.exact = Some(Arc::new(exact));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &[Space] {
        &self.domain
    }

    pub fn codomain(&self) -> Space {
        self.codomain
    }

    pub fn arity(&self) -> usize {
        self.domain.len()
    }

    pub fn has_exact_differential(&self) -> bool {
        self.exact.is_some()
    }

    fn check_args(&self, args: &[Value]) -> Result<(), NumericError> {
        if args.len() != self.domain.len() {
            return Err(NumericError::SpaceMismatch(format!(
                "`{}` takes {} argument(s), got {}",
                self.name,
                self.domain.len(),
                args.len()
            )));
        }
        for (i, (space, v)) in self.domain.iter().zip(args).enumerate() {
            if !space.contains(v) {
                return Err(NumericError::SpaceMismatch(format!(
                    "argument {} of `{}` is not in {space}",
                    i + 1,
                    self.name
                )));
            }
        }
        Ok(())
    }

    pub fn call(&self, args: &[Value]) -> Result<Value, NumericError> {
        self.check_args(args)?;
        (self.eval)(args)
    }

    pub fn call1(&self, x: &Value) -> Result<Value, NumericError> {
        self.call(std::slice::from_ref(x))
    }

    /// Exact mixed differential if this function provides one for the order.
    pub fn exact_differential(&self, args: &[Value], dirs: &[(usize, Value)]) -> Option<Value> {
        if self.check_args(args).is_err() {
            return None;
        }
        if dirs.is_empty() {
            return (self.eval)(args).ok();
        }
        for (slot, d) in dirs {
            let space = self.domain.get(slot.checked_sub(1)?)?;
            if !space.contains(d) {
                return None;
            }
        }
        self.exact.as_ref().and_then(|f| f(args, dirs))
    }
}

impl fmt::Debug for ConcreteFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConcreteFunc")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("codomain", &self.codomain)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}
