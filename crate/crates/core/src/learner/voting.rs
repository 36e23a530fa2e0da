use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::NeighbourList;

/// Zero distances are clamped to this before inverse weighting.
pub const MIN_DISTANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VotingScheme {
    /// One vote per neighbour.
    #[default]
    Majority,
    /// `Σ 1/d^p` per class.
    InverseDistance { p: f64 },
    /// `Σ e^(−d)` per class; each neighbour adds at most 1.
    Exponential,
}

impl VotingScheme {
    pub fn inverse(p: f64) -> Result<Self> {
        let s = VotingScheme::InverseDistance { p };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if let VotingScheme::InverseDistance { p } = *self {
            if !(p >= 1.0 && p.is_finite()) {
                return Err(Error::param("p", format!("vote exponent {p} must be >= 1")));
            }
        }
        Ok(())
    }

    /// Vote contributed by a neighbour at distance `d`.
    #[inline]
    pub fn weight(&self, d: f64) -> f64 {
        match *self {
            VotingScheme::Majority => 1.0,
            VotingScheme::InverseDistance { p } => 1.0 / d.max(MIN_DISTANCE).powf(p),
            VotingScheme::Exponential => (-d).exp(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            VotingScheme::Majority => "majority".into(),
            VotingScheme::InverseDistance { p } => format!("inverse(p={p})"),
            VotingScheme::Exponential => "exponential".into(),
        }
    }
}

impl std::str::FromStr for VotingScheme {
    type Err = Error;

    /// `majority`, `exponential`, `inverse` (p = 1) or `inverse:P`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "majority" => Ok(VotingScheme::Majority),
            "exponential" | "exp" => Ok(VotingScheme::Exponential),
            "inverse" => VotingScheme::inverse(1.0),
            other => match other.strip_prefix("inverse:") {
                Some(p) => {
                    let p: f64 = p
                        .parse()
                        .map_err(|_| Error::param("scheme", format!("bad exponent in '{other}'")))?;
                    VotingScheme::inverse(p)
                }
                None => Err(Error::param("scheme", format!("unknown voting scheme '{other}'"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: usize,
    /// Score per class id.
    pub votes: Vec<f64>,
    pub neighbours: NeighbourList,
}

/// Votes over `n_classes` classes; `labels[i]` is the class of stored row
/// `i`. The winner is the highest score, lowest class id on ties.
pub fn classify(
    neighbours: &NeighbourList,
    labels: &[usize],
    n_classes: usize,
    scheme: VotingScheme,
) -> Result<Prediction> {
    if neighbours.is_empty() {
        return Err(Error::EmptyInput);
    }
    scheme.validate()?;
    let mut votes = vec![0.0; n_classes];
    for n in neighbours.entries() {
        let class = labels[n.index];
        if class >= n_classes {
            return Err(Error::param("labels", format!("class id {class} out of range")));
        }
        votes[class] += scheme.weight(n.distance);
    }
    let label = argmax(&votes);
    Ok(Prediction {
        label,
        votes,
        neighbours: neighbours.clone(),
    })
}

pub(crate) fn argmax(votes: &[f64]) -> usize {
    let mut best = 0;
    for (c, &v) in votes.iter().enumerate() {
        if v > votes[best] {
            best = c;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegressionWeighting {
    #[default]
    Uniform,
    Inverse { p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressionMode {
    /// `Σ w y / Σ w`.
    #[default]
    Normalised,
    /// `(1/k) Σ w y`, which is not a convex combination for inverse weights.
    Literal,
}

/// Weighted neighbour average of `targets`.
pub fn regress(
    neighbours: &NeighbourList,
    targets: &[f64],
    weighting: RegressionWeighting,
    mode: RegressionMode,
) -> Result<f64> {
    if neighbours.is_empty() {
        return Err(Error::EmptyInput);
    }
    let weight = |d: f64| match weighting {
        RegressionWeighting::Uniform => 1.0,
        RegressionWeighting::Inverse { p } => 1.0 / d.max(MIN_DISTANCE).powf(p),
    };
    if let RegressionWeighting::Inverse { p } = weighting {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::param("p", format!("weight exponent {p} must be >= 1")));
        }
    }
    let (mut num, mut den) = (0.0, 0.0);
    for n in neighbours.entries() {
        let w = weight(n.distance);
        num += w * targets[n.index];
        den += w;
    }
    Ok(match mode {
        RegressionMode::Normalised => num / den,
        RegressionMode::Literal => num / neighbours.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::Neighbour;
    use proptest::prelude::*;

    const O: usize = 0;
    const X: usize = 1;

    fn list(ds: &[f64]) -> NeighbourList {
        NeighbourList::from_entries(
            ds.iter()
                .enumerate()
                .map(|(index, &distance)| Neighbour { index, distance })
                .collect(),
        )
    }

    #[test]
    fn unanimous_neighbours() {
        let p = classify(&list(&[1.0, 2.0, 3.0]), &[O, O, O], 2, VotingScheme::Majority).unwrap();
        assert_eq!(p.label, O);
    }

    #[test]
    fn two_to_one_majority() {
        let p = classify(&list(&[1.0, 1.5, 2.0]), &[X, X, O], 2, VotingScheme::Majority).unwrap();
        assert_eq!(p.label, X);
        assert_eq!(p.votes, vec![1.0, 2.0]);
    }

    #[test]
    fn inverse_distance_overturns_the_majority() {
        let p = classify(&list(&[1.0, 2.0, 4.0]), &[O, X, X], 2, VotingScheme::inverse(1.0).unwrap()).unwrap();
        assert_eq!(p.label, O);
        assert!((p.votes[O] - 1.0).abs() < 1e-12);
        assert!((p.votes[X] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn ties_go_to_lowest_class() {
        let p = classify(&list(&[1.0, 1.0]), &[X, O], 2, VotingScheme::Majority).unwrap();
        assert_eq!(p.label, O);
    }

    #[test]
    fn zero_distance_is_clamped_not_special_cased() {
        let p = classify(&list(&[0.0, 0.5]), &[O, X], 2, VotingScheme::inverse(1.0).unwrap()).unwrap();
        assert_eq!(p.label, O);
        assert!((p.votes[O] - 1e12).abs() < 1.0);
    }

    #[test]
    fn empty_list_rejected() {
        assert!(classify(&NeighbourList::default(), &[], 2, VotingScheme::Majority).is_err());
        assert!(VotingScheme::inverse(0.5).is_err());
    }

    #[test]
    fn regression_cases() {
        let eq = list(&[1.0, 1.0]);
        let t = [2.0, 4.0];
        assert_eq!(regress(&eq, &t, RegressionWeighting::Uniform, RegressionMode::Normalised).unwrap(), 3.0);
        let one = list(&[0.3]);
        assert_eq!(regress(&one, &[7.0], RegressionWeighting::Inverse { p: 1.0 }, RegressionMode::Normalised).unwrap(), 7.0);
        let near_far = list(&[1.0, 2.0]);
        let inv = RegressionWeighting::Inverse { p: 1.0 };
        let v = regress(&near_far, &t, inv, RegressionMode::Normalised).unwrap();
        assert!((v - 2.6667).abs() < 1e-4);
        let lit = regress(&near_far, &t, inv, RegressionMode::Literal).unwrap();
        assert!((lit - 2.0).abs() < 1e-12);
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!("inverse:2".parse::<VotingScheme>().unwrap(), VotingScheme::InverseDistance { p: 2.0 });
        assert!("inverse:0.1".parse::<VotingScheme>().is_err());
        assert!("plurality".parse::<VotingScheme>().is_err());
    }

    fn scheme() -> impl Strategy<Value = VotingScheme> {
        prop_oneof![
            Just(VotingScheme::Majority),
            (1.0f64..3.0).prop_map(|p| VotingScheme::InverseDistance { p }),
            Just(VotingScheme::Exponential),
        ]
    }

    proptest! {
        #[test]
        fn scaling_distances_keeps_the_label(
            ds in prop::collection::vec(0.01f64..10.0, 1..12),
            classes in prop::collection::vec(0usize..3, 12),
            c in 0.1f64..10.0,
            p in 1.0f64..3.0,
        ) {
            let labels = &classes[..ds.len()];
            let scaled: Vec<f64> = ds.iter().map(|d| d * c).collect();
            for s in [VotingScheme::Majority, VotingScheme::InverseDistance { p }] {
                let a = classify(&list(&ds), labels, 3, s).unwrap();
                let b = classify(&list(&scaled), labels, 3, s).unwrap();
                prop_assert_eq!(a.label, b.label);
            }
        }

        #[test]
        fn unanimous_class_always_wins(
            ds in prop::collection::vec(0.0f64..10.0, 1..10),
            class in 0usize..4,
            s in scheme(),
        ) {
            let labels = vec![class; ds.len()];
            prop_assert_eq!(classify(&list(&ds), &labels, 4, s).unwrap().label, class);
        }

        #[test]
        fn exponential_votes_bounded(ds in prop::collection::vec(0.0f64..10.0, 1..10)) {
            let labels = vec![0; ds.len()];
            let p = classify(&list(&ds), &labels, 1, VotingScheme::Exponential).unwrap();
            prop_assert!(p.votes[0] <= ds.len() as f64 + 1e-12);
            prop_assert!(p.votes.iter().all(|v| *v >= 0.0));
        }

        #[test]
        fn votes_ignore_neighbour_order(
            ds in prop::collection::vec(0.01f64..10.0, 1..10),
            classes in prop::collection::vec(0usize..3, 10),
            s in scheme(),
        ) {
            // same neighbours stored under reversed indices
            let n = ds.len();
            let labels = &classes[..n];
            let rev_labels: Vec<usize> = labels.iter().rev().copied().collect();
            let rev = NeighbourList::from_entries(
                ds.iter().enumerate().map(|(i, &d)| Neighbour { index: n - 1 - i, distance: d }).collect(),
            );
            let a = classify(&list(&ds), labels, 3, s).unwrap();
            let b = classify(&rev, &rev_labels, 3, s).unwrap();
            prop_assert_eq!(a.label, b.label);
            for (x, y) in a.votes.iter().zip(&b.votes) {
                prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
            }
        }
    }
}
