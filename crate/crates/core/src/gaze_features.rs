//! Per-instance gaze feature blocks over the four regions around the pronoun.
//!
//! Feature names are `<REGION>.<Measure>`, e.g. `IT_PLUS_NEXT.Skip`. Region
//! neighbours are looked up inside the pronoun's trial; a missing neighbour
//! yields a zero block and sets `IT.boundary_prev` / `IT.boundary_next`.

use crate::corpus::{GazeMeasures, Token};
use crate::error::{Error, Result};
use crate::feature::{FeatureVector, Region, Source};
use crate::measure::{Combine, GazeGroup, Measure};

pub const BOUNDARY_PREV: &str = "IT.boundary_prev";
pub const BOUNDARY_NEXT: &str = "IT.boundary_next";

/// How [`combine_it_next`] merges the pronoun with the following word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CombineRule {
    /// Sum additive measures, average the rest (Skip, run indices, flags).
    #[default]
    Split,
    /// Sum every measure.
    SumAll,
}

pub fn feature_name(region: Region, m: Measure) -> String {
    format!("{}.{}", region.prefix(), m.name())
}

/// The token gazed at for a plain region, or `None` at a trial boundary.
fn neighbour(uid: usize, region: Region, tokens: &[Token]) -> Option<usize> {
    let here = tokens.get(uid)?;
    let other = match region {
        Region::Prev => uid.checked_sub(1)?,
        Region::It | Region::ItPlusNext => return Some(uid),
        Region::Next => uid + 1,
    };
    tokens
        .get(other)
        .filter(|t| t.trial_id == here.trial_id)
        .map(|t| t.uid)
}

fn project(values: Option<&GazeMeasures>, region: Region, trial_level: bool) -> FeatureVector {
    let mut fv = FeatureVector::new();
    for m in Measure::ALL {
        if m.is_trial_level() && !trial_level {
            continue;
        }
        let v = values.map_or(0.0, |g| g.get(m));
        fv.push(
            feature_name(region, m),
            v,
            Source::Gaze {
                region,
                group: m.group(),
            },
        );
    }
    fv
}

/// All 26 measures for a plain region (PREV, IT or NEXT), zero at a boundary.
pub fn full_region_projection(
    uid: usize,
    region: Region,
    tokens: &[Token],
    gaze: &[GazeMeasures],
) -> Result<FeatureVector> {
    if region == Region::ItPlusNext {
        return Err(Error::invalid("IT_PLUS_NEXT is derived, not projected"));
    }
    check_uid(uid, tokens, gaze)?;
    let target = neighbour(uid, region, tokens).map(|i| &gaze[i]);
    Ok(project(target, region, true))
}

fn check_uid(uid: usize, tokens: &[Token], gaze: &[GazeMeasures]) -> Result<()> {
    if uid >= tokens.len() || tokens.len() != gaze.len() {
        return Err(Error::invalid(format!(
            "token {uid} is outside the corpus ({} tokens, {} gaze rows)",
            tokens.len(),
            gaze.len()
        )));
    }
    Ok(())
}

/// Gaze block for one region of one instance.
///
/// Trial-level measures are constant within a trial and appear only in the
/// blocks that contain the pronoun (IT and IT_PLUS_NEXT). PREV and NEXT blocks
/// carry their boundary flag.
pub fn region_features(
    uid: usize,
    region: Region,
    tokens: &[Token],
    gaze: &[GazeMeasures],
) -> Result<FeatureVector> {
    check_uid(uid, tokens, gaze)?;
    match region {
        Region::It => Ok(project(Some(&gaze[uid]), region, true)),
        Region::Prev | Region::Next => {
            let target = neighbour(uid, region, tokens);
            let mut fv = project(target.map(|i| &gaze[i]), region, false);
            let flag = if region == Region::Prev {
                BOUNDARY_PREV
            } else {
                BOUNDARY_NEXT
            };
            fv.push(flag, target.is_none(), Source::Boundary);
            Ok(fv)
        }
        Region::ItPlusNext => {
            let it = full_region_projection(uid, Region::It, tokens, gaze)?;
            let next = full_region_projection(uid, Region::Next, tokens, gaze)?;
            combine_it_next(&it, &next)
        }
    }
}

fn registry_values(fv: &FeatureVector) -> Result<[f64; Measure::COUNT]> {
    let mut out = [f64::NAN; Measure::COUNT];
    for f in fv.entries() {
        let Source::Gaze { .. } = f.source else {
            continue;
        };
        let suffix = f.name.split_once('.').map_or(f.name.as_str(), |(_, s)| s);
        let m = Measure::from_name(suffix).ok_or_else(|| Error::Schema {
            feature: f.name.clone(),
            message: "not a registry measure".into(),
        })?;
        out[m.index()] = f.value.as_f64().unwrap_or(f64::NAN);
    }
    if let Some(m) = Measure::ALL.into_iter().find(|m| out[m.index()].is_nan()) {
        return Err(Error::Schema {
            feature: m.name().to_string(),
            message: "missing from a region vector passed to combine_it_next".into(),
        });
    }
    Ok(out)
}

/// Merges the pronoun's block with the next word's block into IT_PLUS_NEXT.
pub fn combine_it_next(fv_it: &FeatureVector, fv_next: &FeatureVector) -> Result<FeatureVector> {
    combine_it_next_with(fv_it, fv_next, CombineRule::Split)
}

pub fn combine_it_next_with(
    fv_it: &FeatureVector,
    fv_next: &FeatureVector,
    rule: CombineRule,
) -> Result<FeatureVector> {
    let it = registry_values(fv_it)?;
    let next = registry_values(fv_next)?;
    let region = Region::ItPlusNext;
    let mut fv = FeatureVector::new();
    for m in Measure::ALL {
        let (a, b) = (it[m.index()], next[m.index()]);
        let v = match (rule, m.combine()) {
            (CombineRule::SumAll, _) | (CombineRule::Split, Combine::Sum) => a + b,
            (CombineRule::Split, Combine::Mean) => (a + b) / 2.0,
        };
        fv.push(
            feature_name(region, m),
            v,
            Source::Gaze {
                region,
                group: m.group(),
            },
        );
    }
    Ok(fv)
}

/// Keeps exactly the gaze entries of one temporal group. Entries that are not
/// gaze measures (boundary flags) are dropped.
pub fn group_filter(fv: &FeatureVector, group: GazeGroup) -> FeatureVector {
    let mut out = fv.clone();
    out.retain(|f| matches!(f.source, Source::Gaze { group: g, .. } if g == group));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tokens(trials: &[u32]) -> Vec<Token> {
        trials
            .iter()
            .enumerate()
            .map(|(i, &trial_id)| Token {
                uid: i,
                trial_id,
                sentence_id: 0,
                paragraph_id: 0,
                position_in_sentence: i as u32,
                surface: "w".into(),
                is_punctuation: false,
            })
            .collect()
    }

    fn gaze(n: usize) -> Vec<GazeMeasures> {
        (0..n)
            .map(|uid| {
                let mut values = [0.0; Measure::COUNT];
                for (j, v) in values.iter_mut().enumerate() {
                    *v = (uid * 100 + j) as f64;
                }
                values[Measure::Skip.index()] = (uid % 2) as f64;
                GazeMeasures {
                    token_uid: uid,
                    values,
                    n_participants: 14,
                }
            })
            .collect()
    }

    #[test]
    fn it_region_passes_values_through() {
        let toks = tokens(&[1, 1, 1]);
        let mut g = gaze(3);
        g[1].values[Measure::TotalReadingTime.index()] = 150.0;
        let fv = region_features(1, Region::It, &toks, &g).unwrap();
        assert_eq!(fv.len(), 26);
        assert_eq!(fv.get("IT.Total_Reading_Time").unwrap().as_f64(), Some(150.0));
    }

    #[test]
    fn prev_at_trial_start_is_zero_with_flag() {
        let toks = tokens(&[1, 2, 2]);
        let g = gaze(3);
        let fv = region_features(1, Region::Prev, &toks, &g).unwrap();
        assert_eq!(fv.get(BOUNDARY_PREV).unwrap().as_f64(), Some(1.0));
        for f in fv.entries().iter().filter(|f| f.source != Source::Boundary) {
            assert_eq!(f.value.as_f64(), Some(0.0), "{}", f.name);
        }
        let inner = region_features(2, Region::Prev, &toks, &g).unwrap();
        assert_eq!(inner.get(BOUNDARY_PREV).unwrap().as_f64(), Some(0.0));
    }

    #[test]
    fn next_region_matches_next_tokens_it_projection() {
        let toks = tokens(&[1, 1, 1]);
        let g = gaze(3);
        let next = region_features(0, Region::Next, &toks, &g).unwrap();
        let it = region_features(1, Region::It, &toks, &g).unwrap();
        for m in Measure::ALL.into_iter().filter(|m| !m.is_trial_level()) {
            assert_eq!(
                next.get(&feature_name(Region::Next, m)),
                it.get(&feature_name(Region::It, m)),
                "{m}"
            );
        }
        assert!(next.get("NEXT.Trial_Fixation_Count").is_none());
    }

    fn single(region: Region, set: &[(Measure, f64)]) -> FeatureVector {
        let mut values = [0.0; Measure::COUNT];
        for (m, v) in set {
            values[m.index()] = *v;
        }
        let g = GazeMeasures {
            token_uid: 0,
            values,
            n_participants: 1,
        };
        project(Some(&g), region, true)
    }

    #[test]
    fn combine_sums_durations_and_averages_skip() {
        let it = single(
            Region::It,
            &[(Measure::GazeDuration, 120.0), (Measure::Skip, 1.0)],
        );
        let next = single(
            Region::Next,
            &[(Measure::GazeDuration, 80.0), (Measure::Skip, 0.0)],
        );
        let c = combine_it_next(&it, &next).unwrap();
        assert_eq!(c.get("IT_PLUS_NEXT.Gaze_Duration").unwrap().as_f64(), Some(200.0));
        assert_eq!(c.get("IT_PLUS_NEXT.Skip").unwrap().as_f64(), Some(0.5));

        let summed = combine_it_next_with(&it, &next, CombineRule::SumAll).unwrap();
        assert_eq!(summed.get("IT_PLUS_NEXT.Skip").unwrap().as_f64(), Some(1.0));
    }

    #[test]
    fn combine_with_zero_is_identity_for_additive_entries() {
        let toks = tokens(&[1, 1]);
        let g = gaze(2);
        let v = full_region_projection(1, Region::It, &toks, &g).unwrap();
        let zero = project(None, Region::Next, true);
        let c = combine_it_next(&v, &zero).unwrap();
        for m in Measure::ALL.into_iter().filter(|m| m.combine() == Combine::Sum) {
            assert_eq!(
                c.get(&feature_name(Region::ItPlusNext, m)),
                v.get(&feature_name(Region::It, m))
            );
        }
    }

    #[test]
    fn combine_rejects_partial_registry() {
        let toks = tokens(&[1, 1]);
        let g = gaze(2);
        let it = full_region_projection(0, Region::It, &toks, &g).unwrap();
        let partial = region_features(0, Region::Next, &toks, &g).unwrap();
        assert!(matches!(combine_it_next(&it, &partial), Err(Error::Schema { .. })));
    }

    #[test]
    fn group_sizes() {
        let toks = tokens(&[1, 1]);
        let g = gaze(2);
        let fv = region_features(0, Region::It, &toks, &g).unwrap();
        assert_eq!(group_filter(&fv, GazeGroup::Early).len(), 5);
        assert_eq!(group_filter(&fv, GazeGroup::Medium).len(), 5);
        assert_eq!(group_filter(&fv, GazeGroup::Late).len(), 16);
    }
}
