//! Langevin problem definitions and their checks.

pub mod audit;
pub mod expr;
pub mod gibbs;
pub mod problem;

pub use audit::{audit_hypotheses, audit_with_constants, AuditVerdict, Hypothesis, HypothesisAudit, HypothesisCheck};
pub use expr::{parse_components, parse_field_expr, Expr, FieldExpr};
pub use gibbs::{gibbs_density_oracle, gibbs_for_problem, gibbs_from_potential, GibbsTable, GridSpec};
pub use problem::{
    builtin, builtin_problem, ConstantsDoc, DeclaredConstants, Diffusion, Drift, FieldDoc, ProblemDoc,
    ProblemSpec, SigmaDoc, BUILTINS,
};
