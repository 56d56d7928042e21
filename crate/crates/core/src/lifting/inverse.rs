use super::{CoefficientSet, LiftingRecord};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Undoes every recorded stage, last first, returning values by vertex id.
pub fn inverse<T: Scalar>(coeffs: &CoefficientSet<T>, record: &LiftingRecord<T>) -> Result<Vec<T>> {
    if coeffs.detail_ids.len() != record.stages.len() || coeffs.details.len() != record.stages.len() {
        return Err(Error::RecordMismatch(format!(
            "{} details for {} stages",
            coeffs.details.len(),
            record.stages.len()
        )));
    }
    if coeffs.scaling_ids != record.survivors || coeffs.scaling.len() != record.survivors.len() {
        return Err(Error::RecordMismatch("scaling ids differ from record survivors".into()));
    }
    let mut c = vec![T::zero(); record.m];
    for (&k, &v) in coeffs.scaling_ids.iter().zip(&coeffs.scaling) {
        c[k] = v;
    }
    for (st, (&id, &d)) in record
        .stages
        .iter()
        .zip(coeffs.detail_ids.iter().zip(&coeffs.details))
        .rev()
    {
        if st.removed != id {
            return Err(Error::RecordMismatch(format!(
                "stage {} removed {} but detail belongs to {id}",
                st.stage, st.removed
            )));
        }
        for (&s, &b) in st.neighbors.iter().zip(&st.update) {
            c[s] -= b * d;
        }
        let estimate: T = st.neighbors.iter().zip(&st.prediction).map(|(&s, &a)| a * c[s]).sum();
        c[st.removed] = d + estimate;
    }
    Ok(c)
}
