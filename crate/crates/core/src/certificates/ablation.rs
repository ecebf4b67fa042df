//! Ablation lower level: selected rows carry no information, so the
//! certificate is a plain shift by `Delta`.

use super::delta::DeltaValue;

pub fn ablation_lower(p_y: f64, delta: DeltaValue) -> f64 {
    (p_y - delta.delta).clamp(0.0, 1.0)
}

pub fn ablation_upper(p_y: f64, delta: DeltaValue) -> f64 {
    (p_y + delta.delta).clamp(0.0, 1.0)
}
