use serde::Serialize;

use super::TorusSymbol;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeminormEntry {
    /// derivative orders in x and xi
    pub ax: u32,
    pub bx: u32,
    pub constant: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeminormReport {
    pub delta: f64,
    pub entries: Vec<SeminormEntry>,
}

impl SeminormReport {
    pub fn get(&self, ax: u32, bx: u32) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.ax == ax && e.bx == bx)
            .map(|e| e.constant)
    }

    /// Largest constant among total order `k`.
    pub fn max_at_order(&self, k: u32) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.ax + e.bx == k)
            .map(|e| e.constant)
            .fold(0.0, f64::max)
    }
}

/// sup of delta^(|a|+|b|) |d_x^a d_xi^b a| for all |a|+|b| <= order,
/// sampled on a grid fine enough to resolve the bandwidth.
pub fn seminorm_check(a: &TorusSymbol, delta: f64, order: u32) -> SeminormReport {
    let m = (8 * a.bandwidth()).max(16).next_power_of_two();
    let mut entries = Vec::new();
    for total in 0..=order {
        for ax in 0..=total {
            let bx = total - ax;
            let d = a.derivative(ax, bx);
            let sup = if d.is_empty() { 0.0 } else { d.grid_sup(m) };
            entries.push(SeminormEntry {
                ax,
                bx,
                constant: delta.powi(total as i32) * sup,
            });
        }
    }
    SeminormReport { delta, entries }
}
