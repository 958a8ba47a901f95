//! Decision-boundary and belief-landscape export for two-feature models.

use std::io::Write;

use rand::Rng;

use crate::error::{Error, Result};
use crate::evidence::BeliefAssignment;
use crate::inference::{combined_evidence, filtered_match_set, infer, Scheme};
use crate::learner::TrainedModel;

pub const DEFAULT_RESOLUTION: usize = 200;

/// One lattice point. `pred` is `-1` where no experienced rule matches.
/// The evidence fields are filled for the DS scheme only.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub x1: f64,
    pub x2: f64,
    pub pred: i64,
    pub betp: Option<Vec<f64>>,
    pub masses: Option<Vec<f64>>,
    pub mass_theta: Option<f64>,
}

/// Evaluate the model on an `R x R` lattice over the unit square, `x1`
/// varying slowest. Lattice coordinates are `i / (R - 1)`.
pub fn export_grid<R: Rng>(
    model: &TrainedModel,
    resolution: usize,
    theta_exploit: f64,
    scheme: Scheme,
    rng: &mut R,
) -> Result<Vec<GridCell>> {
    if model.dimension() != 2 {
        return Err(Error::input(format!(
            "grid export needs a two-feature model, this one has {}",
            model.dimension()
        )));
    }
    if resolution < 2 {
        return Err(Error::input("grid resolution must be at least 2"));
    }
    let n = model.num_classes();
    let partition = model.partition();
    let step = 1.0 / (resolution - 1) as f64;
    let mut cells = Vec::with_capacity(resolution * resolution);
    for i in 0..resolution {
        for j in 0..resolution {
            let (x1, x2) = (i as f64 * step, j as f64 * step);
            let x = [Some(x1), Some(x2)];
            let matched = filtered_match_set(&model.population, &partition, &x, theta_exploit)?;
            let cell = if matched.is_empty() {
                let vacuous = BeliefAssignment::vacuous(n);
                let ds = scheme == Scheme::Ds;
                GridCell {
                    x1,
                    x2,
                    pred: -1,
                    betp: ds.then(|| vacuous.pignistic()),
                    masses: ds.then(|| vacuous.singletons().to_vec()),
                    mass_theta: ds.then_some(1.0),
                }
            } else {
                let out = infer(&matched, n, scheme, rng)?;
                let evidence = match scheme {
                    Scheme::Ds => Some(combined_evidence(&matched, n)?),
                    _ => None,
                };
                GridCell {
                    x1,
                    x2,
                    pred: out.predicted_class as i64,
                    betp: out.betp,
                    masses: evidence.as_ref().map(|m| m.singletons().to_vec()),
                    mass_theta: evidence.map(|m| m.ignorance()),
                }
            };
            cells.push(cell);
        }
    }
    Ok(cells)
}

pub fn grid_header(class_names: &[String]) -> Vec<String> {
    let mut h = vec!["x1".to_string(), "x2".into(), "pred".into()];
    h.extend(class_names.iter().map(|c| format!("betp_{c}")));
    h.extend(class_names.iter().map(|c| format!("mass_{c}")));
    h.push("mass_theta".into());
    h
}

/// Write cells as CSV; evidence columns are left empty when absent.
pub fn write_grid<W: Write>(cells: &[GridCell], class_names: &[String], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let err = |e: csv::Error| Error::data(format!("csv write failed: {e}"));
    w.write_record(grid_header(class_names)).map_err(err)?;
    let n = class_names.len();
    let values = |v: &Option<Vec<f64>>| -> Vec<String> {
        match v {
            Some(v) => v.iter().map(f64::to_string).collect(),
            None => vec![String::new(); n],
        }
    };
    for c in cells {
        let mut record = vec![c.x1.to_string(), c.x2.to_string(), c.pred.to_string()];
        record.extend(values(&c.betp));
        record.extend(values(&c.masses));
        record.push(c.mass_theta.map(|v| v.to_string()).unwrap_or_default());
        w.write_record(&record).map_err(err)?;
    }
    w.flush()?;
    Ok(())
}
