//! Reserve offers from historical lost opportunity.
//!
//! A unit's spinning offer is the average, over its historical dispatched
//! intervals, of the energy margin it would forgo by holding capacity back:
//! bus LMP minus average fuel cost at the dispatched output, floored at zero
//! per sample. Regulation and non-spinning offers are fixed multiples of it.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::case::MarketCase;

pub const DEFAULT_REG_MULTIPLIER: f64 = 3.28;
/// Applied to the regulation offer.
pub const DEFAULT_NSP_MULTIPLIER: f64 = 0.0864;

#[derive(Debug, Error)]
pub enum OfferError {
    #[error("offer history is empty")]
    EmptyHistory,
    #[error("history sample {sample}: {message}")]
    InconsistentHistory { sample: usize, message: String },
    #[error("offer set does not cover {0}")]
    Coverage(String),
    #[error("reading history from {path}: {message}")]
    Read { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OfferProvenance {
    Input,
    Computed,
}

/// $/MWh offers for one generator and interval.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReserveOffer {
    pub reg: f64,
    pub spin: f64,
    pub nsp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OfferSet {
    /// generator id → offers per interval
    pub offers: BTreeMap<String, Vec<ReserveOffer>>,
    pub provenance: OfferProvenance,
}

impl OfferSet {
    /// The offers a case already carries.
    pub fn from_case(case: &MarketCase) -> Self {
        let offers = case
            .generators
            .iter()
            .map(|g| {
                let per_t = (0..case.horizon)
                    .map(|t| ReserveOffer {
                        reg: g.offer_reg[t],
                        spin: g.offer_spin[t],
                        nsp: g.offer_nsp[t],
                    })
                    .collect();
                (g.id.clone(), per_t)
            })
            .collect();
        OfferSet {
            offers,
            provenance: OfferProvenance::Input,
        }
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["gen", "t", "offer_reg", "offer_spin", "offer_nsp"])?;
        for (gen, per_t) in &self.offers {
            for (t, o) in per_t.iter().enumerate() {
                w.write_record([
                    gen.clone(),
                    (t + 1).to_string(),
                    crate::num(o.reg),
                    crate::num(o.spin),
                    crate::num(o.nsp),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Regulation and non-spinning offers implied by a spinning offer.
pub fn offers_from_spin(spin: f64, reg_mult: f64, nsp_mult: f64) -> ReserveOffer {
    let reg = reg_mult * spin;
    ReserveOffer {
        reg,
        spin,
        nsp: nsp_mult * reg,
    }
}

/// One historical market day: LMP per bus and dispatch per generator, each
/// indexed by interval.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HistorySample {
    pub lmp: BTreeMap<String, Vec<f64>>,
    pub dispatch: BTreeMap<String, Vec<f64>>,
}

fn read_series(
    path: &Path,
    key_column: &str,
    value_column: &str,
) -> Result<BTreeMap<String, Vec<f64>>, OfferError> {
    let fail = |message: String| OfferError::Read {
        path: path.display().to_string(),
        message,
    };
    let mut rdr = csv::Reader::from_path(path).map_err(|e| fail(e.to_string()))?;
    let headers = rdr.headers().map_err(|e| fail(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| fail(format!("missing column `{name}`")))
    };
    let (key, t_col, value) = (col(key_column)?, col("t")?, col(value_column)?);
    let mut out: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| fail(e.to_string()))?;
        let t: usize = record[t_col]
            .parse()
            .map_err(|_| fail(format!("bad interval `{}`", &record[t_col])))?;
        let v: f64 = record[value]
            .parse()
            .map_err(|_| fail(format!("bad value `{}`", &record[value])))?;
        if t == 0 {
            return Err(fail("intervals are numbered from 1".into()));
        }
        let series = out.entry(record[key].to_string()).or_default();
        if series.len() < t {
            series.resize(t, 0.0);
        }
        series[t - 1] = v;
    }
    Ok(out)
}

/// Reads one market day from a results directory written by a previous
/// run (`prices_lmp.csv` and `commitment.csv`).
pub fn read_history_sample(dir: &Path) -> Result<HistorySample, OfferError> {
    Ok(HistorySample {
        lmp: read_series(&dir.join("prices_lmp.csv"), "bus", "lmp")?,
        dispatch: read_series(&dir.join("commitment.csv"), "gen", "p")?,
    })
}

pub fn compute_offers(
    history: &[HistorySample],
    case: &MarketCase,
    reg_mult: f64,
    nsp_mult: f64,
) -> Result<OfferSet, OfferError> {
    if history.is_empty() {
        return Err(OfferError::EmptyHistory);
    }
    let mut offers = BTreeMap::new();
    for g in &case.generators {
        let mut total = 0.0;
        let mut samples = 0usize;
        for (s, sample) in history.iter().enumerate() {
            let Some(dispatch) = sample.dispatch.get(&g.id) else {
                continue;
            };
            let lmp = sample
                .lmp
                .get(&g.bus)
                .ok_or_else(|| OfferError::InconsistentHistory {
                    sample: s,
                    message: format!("no LMP for bus `{}` of generator `{}`", g.bus, g.id),
                })?;
            if lmp.len() < dispatch.len() {
                return Err(OfferError::InconsistentHistory {
                    sample: s,
                    message: format!("LMP series for bus `{}` is shorter than dispatch", g.bus),
                });
            }
            for (t, &p) in dispatch.iter().enumerate() {
                if p <= 0.0 {
                    continue;
                }
                let average_cost = g.fuel_cost(p) / p;
                total += (lmp[t] - average_cost).max(0.0);
                samples += 1;
            }
        }
        let spin = if samples == 0 {
            0.0
        } else {
            total / samples as f64
        };
        let offer = offers_from_spin(spin, reg_mult, nsp_mult);
        offers.insert(g.id.clone(), vec![offer; case.horizon]);
    }
    for (s, sample) in history.iter().enumerate() {
        if let Some(unknown) = sample
            .dispatch
            .keys()
            .find(|id| case.generator(id).is_none())
        {
            return Err(OfferError::InconsistentHistory {
                sample: s,
                message: format!("dispatch for unknown generator `{unknown}`"),
            });
        }
    }
    Ok(OfferSet {
        offers,
        provenance: OfferProvenance::Computed,
    })
}

/// Returns a copy of `case` with every generator's offers replaced.
pub fn apply_offers(case: &MarketCase, offers: &OfferSet) -> Result<MarketCase, OfferError> {
    let mut out = case.clone();
    for g in &mut out.generators {
        let per_t = offers
            .offers
            .get(&g.id)
            .ok_or_else(|| OfferError::Coverage(format!("generator `{}`", g.id)))?;
        if per_t.len() < case.horizon {
            return Err(OfferError::Coverage(format!(
                "all {} intervals of generator `{}`",
                case.horizon, g.id
            )));
        }
        g.offer_reg = per_t[..case.horizon].iter().map(|o| o.reg).collect();
        g.offer_spin = per_t[..case.horizon].iter().map(|o| o.spin).collect();
        g.offer_nsp = per_t[..case.horizon].iter().map(|o| o.nsp).collect();
    }
    Ok(out)
}
