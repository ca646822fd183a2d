//! Synthetic corpora with known roles.
//!
//! Every role owns a disjoint pool of argument lemmas. An instance picks a
//! predicate and 2–4 distinct roles; each role contributes one argument
//! whose lemma comes from the role's pool, or with probability `noise_rate`
//! uniformly from all pools. Roles link to relations by voice: in active
//! clauses A0 is the subject (SBJ) and A1 the object (OBJ); in passive
//! clauses A1 is the subject and A0 a `by` agent (LGS). Each argument keeps
//! its linked relation with probability `cue_reliability` and takes another
//! role's relation otherwise.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{GoldArgument, PredicateAnnotation, Sentence, Token};

pub const CANONICAL_DEPRELS: [&str; 10] = [
    "SBJ", "OBJ", "ADV", "TMP", "LOC", "MNR", "DIR", "PRP", "EXT", "OPRD",
];

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub num_roles: usize,
    pub num_predicates: usize,
    pub lemmas_per_role: usize,
    pub noise_rate: f64,
    pub instances: usize,
    pub seed: u64,
    /// Probability that an argument keeps the relation its role links to.
    pub cue_reliability: f64,
    /// Probability that a clause is passive: A1 surfaces as subject and A0
    /// as a `by` agent.
    pub passive_rate: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            num_roles: 3,
            num_predicates: 30,
            lemmas_per_role: 20,
            noise_rate: 0.1,
            instances: 5000,
            seed: 7,
            cue_reliability: 0.9,
            passive_rate: 0.3,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.num_roles < 2 {
            return Err("synthetic corpora need at least 2 roles".into());
        }
        if self.num_predicates == 0 || self.lemmas_per_role == 0 {
            return Err("predicate count and pool size must be positive".into());
        }
        if !(0.0..1.0).contains(&self.noise_rate) {
            return Err(format!("noise rate {} is outside [0, 1)", self.noise_rate));
        }
        if !(0.0..=1.0).contains(&self.cue_reliability) {
            return Err(format!(
                "cue reliability {} is outside [0, 1]",
                self.cue_reliability
            ));
        }
        if !(0.0..=1.0).contains(&self.passive_rate) {
            return Err(format!("passive rate {} is outside [0, 1]", self.passive_rate));
        }
        Ok(())
    }

    pub fn lemma(&self, role: usize, index: usize) -> String {
        format!("lem{:04}", role * self.lemmas_per_role + index)
    }

    /// The role whose pool contains `lemma`.
    pub fn pool_of(&self, lemma: &str) -> Option<usize> {
        let n: usize = lemma.strip_prefix("lem")?.parse().ok()?;
        let role = n / self.lemmas_per_role;
        (role < self.num_roles).then_some(role)
    }

    pub fn role_label(role: usize) -> String {
        format!("A{}", role)
    }

    pub fn role_of_label(label: &str) -> Option<usize> {
        label.strip_prefix('A')?.parse().ok()
    }

    pub fn canonical_deprel(role: usize) -> String {
        CANONICAL_DEPRELS
            .get(role)
            .map(|s| s.to_string())
            .unwrap_or_else(|| format!("REL{}", role))
    }
}

/// Relation of the demoted agent in a passive clause.
pub const PASSIVE_AGENT_DEPREL: &str = "LGS";

/// Relation linking `role` to the predicate before cue noise.
pub fn linked_deprel(role: usize, passive: bool) -> String {
    match (passive, role) {
        (true, 0) => PASSIVE_AGENT_DEPREL.to_string(),
        (true, 1) => SyntheticSpec::canonical_deprel(0),
        _ => SyntheticSpec::canonical_deprel(role),
    }
}

/// Generates `spec.instances` single-predicate sentences in CoNLL 2008
/// layout, deterministically in `spec.seed`. Subjects precede the
/// predicate and every other argument follows it; passive clauses carry a
/// `be` auxiliary heading a VBN predicate.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Vec<Sentence> {
    spec.validate().expect("valid synthetic spec");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let roles: Vec<usize> = (0..spec.num_roles).collect();
    let max_args = spec.num_roles.min(4);
    let subject = SyntheticSpec::canonical_deprel(0);

    (0..spec.instances)
        .map(|id| {
            let predicate = rng.gen_range(0..spec.num_predicates);
            let passive = rng.gen::<f64>() < spec.passive_rate;
            let n = rng.gen_range(2..=max_args);
            let mut chosen: Vec<usize> = roles.choose_multiple(&mut rng, n).copied().collect();
            chosen.shuffle(&mut rng);

            let args: Vec<(usize, String, String)> = chosen
                .iter()
                .map(|&role| {
                    let pool = if rng.gen::<f64>() < spec.noise_rate {
                        rng.gen_range(0..spec.num_roles)
                    } else {
                        role
                    };
                    let lemma = spec.lemma(pool, rng.gen_range(0..spec.lemmas_per_role));
                    let linked = linked_deprel(role, passive);
                    let deprel = if rng.gen::<f64>() < spec.cue_reliability {
                        linked
                    } else {
                        let others: Vec<String> = roles
                            .iter()
                            .map(|&r| SyntheticSpec::canonical_deprel(r))
                            .filter(|d| *d != linked)
                            .collect();
                        others.choose(&mut rng).expect("at least two roles").clone()
                    };
                    (role, lemma, deprel)
                })
                .collect();

            let (before, after): (Vec<_>, Vec<_>) =
                args.into_iter().partition(|(_, _, deprel)| *deprel == subject);
            let aux_index = passive.then_some(before.len() + 1);
            let pred_index = before.len() + 1 + usize::from(passive);
            let pred_lemma = format!("pred{:03}", predicate);

            let mut tokens = Vec::with_capacity(before.len() + after.len() + 2);
            let mut gold = Vec::with_capacity(before.len() + after.len());
            let mut push_arg = |tokens: &mut Vec<Token>, (role, lemma, deprel): (usize, String, String)| {
                let index = tokens.len() + 1;
                tokens.push(Token {
                    index,
                    form: lemma.clone(),
                    lemma,
                    pos: "NN".into(),
                    head: pred_index,
                    deprel,
                });
                gold.push(GoldArgument {
                    token: index,
                    role: SyntheticSpec::role_label(role),
                });
            };
            for arg in before {
                push_arg(&mut tokens, arg);
            }
            if let Some(aux) = aux_index {
                tokens.push(Token {
                    index: aux,
                    form: "was".into(),
                    lemma: "be".into(),
                    pos: "VBD".into(),
                    head: 0,
                    deprel: "ROOT".into(),
                });
            }
            tokens.push(Token {
                index: pred_index,
                form: pred_lemma.clone(),
                lemma: pred_lemma,
                pos: if passive { "VBN" } else { "VBD" }.into(),
                head: aux_index.unwrap_or(0),
                deprel: if passive { "VC" } else { "ROOT" }.into(),
            });
            for arg in after {
                push_arg(&mut tokens, arg);
            }
            let annotation = PredicateAnnotation {
                token: pred_index,
                sense: format!("pred{:03}.01", predicate),
                args: gold,
            };
            Sentence::from_parts(id, tokens, vec![annotation])
        })
        .collect()
}
