//! JSON serialization of mixed coherent-state ensembles.
//!
//! ```json
//! {"modeCount": 2,
//!  "components": [{"weight": 0.9,
//!                  "terms": [{"coefficient": [0.7, 0.0], "label": [[1.0, 0.0], [1.0, 0.0]]}]}]}
//! ```

use ecsim_core::states::{CoherentLabel, MixedState, SuperposedState};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermDump {
    pub coefficient: [f64; 2],
    pub label: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentDump {
    pub weight: f64,
    pub terms: Vec<TermDump>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StateDump {
    pub mode_count: usize,
    pub components: Vec<ComponentDump>,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

impl From<&MixedState> for StateDump {
    fn from(rho: &MixedState) -> Self {
        let components = rho
            .components()
            .iter()
            .map(|(w, s)| ComponentDump {
                weight: *w,
                terms: s
                    .terms()
                    .iter()
                    .map(|t| TermDump {
                        coefficient: pair(t.coefficient),
                        label: t.label.amplitudes().iter().map(|&z| pair(z)).collect(),
                    })
                    .collect(),
            })
            .collect();
        StateDump { mode_count: rho.mode_count(), components }
    }
}

impl StateDump {
    pub fn to_state(&self) -> Result<MixedState, CliError> {
        let mut comps = Vec::with_capacity(self.components.len());
        for c in &self.components {
            let mut terms = Vec::with_capacity(c.terms.len());
            for t in &c.terms {
                let label = CoherentLabel::new(t.label.iter().map(|p| Complex64::new(p[0], p[1])).collect())?;
                terms.push((Complex64::new(t.coefficient[0], t.coefficient[1]), label));
            }
            comps.push((c.weight, SuperposedState::new(self.mode_count, terms)?));
        }
        Ok(MixedState::new(comps)?)
    }
}
