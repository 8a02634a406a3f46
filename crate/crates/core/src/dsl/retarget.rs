use super::ast::PartStatement;
use crate::math::{SimilarityTransform, TransformError};

/// Rewrites `s` so that executing it yields the original mesh mapped by `t`.
///
/// The transform is folded into the statement's own placement, so curve
/// parameters are left untouched.
pub fn retarget_statement(
    s: &PartStatement,
    t: &SimilarityTransform,
) -> Result<PartStatement, TransformError> {
    if t.is_identity() {
        return Ok(s.clone());
    }
    let mut out = s.clone();
    out.shape.transform = s.shape.transform.then(t)?;
    Ok(out)
}
