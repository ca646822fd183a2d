use std::collections::HashMap;

use crate::corpus::{Lexicon, PredicateInstance};

/// Number of relations that get their own cluster.
pub const SYNTF_TOP_RELATIONS: usize = 20;

/// Syntactic-function baseline: one cluster per frequent dependency
/// relation, plus a catch-all (id [`SYNTF_TOP_RELATIONS`]).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntfClusters {
    top: Vec<String>,
    lookup: HashMap<usize, usize>,
}

impl SyntfClusters {
    /// Ranks relations by frequency over `instances`, ties by relation
    /// string.
    pub fn fit(instances: &[PredicateInstance], deprels: &Lexicon) -> Self {
        let mut counts: HashMap<usize, u64> = HashMap::new();
        for arg in instances.iter().flat_map(|i| &i.args) {
            *counts.entry(arg.deprel).or_default() += 1;
        }
        let name = |id: usize| deprels.get(id).unwrap_or("").to_string();
        let mut ranked: Vec<(usize, u64)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| name(a.0).cmp(&name(b.0))));
        ranked.truncate(SYNTF_TOP_RELATIONS);
        SyntfClusters {
            top: ranked.iter().map(|&(id, _)| name(id)).collect(),
            lookup: ranked
                .iter()
                .enumerate()
                .map(|(cluster, &(id, _))| (id, cluster))
                .collect(),
        }
    }

    pub fn catch_all(&self) -> usize {
        SYNTF_TOP_RELATIONS
    }

    pub fn cluster(&self, deprel: usize) -> usize {
        self.lookup.get(&deprel).copied().unwrap_or(self.catch_all())
    }

    /// The relation a cluster stands for, or `OTHER` for the catch-all.
    pub fn cluster_name(&self, cluster: usize) -> &str {
        self.top.get(cluster).map(String::as_str).unwrap_or("OTHER")
    }

    pub fn relations(&self) -> &[String] {
        &self.top
    }
}

pub fn syntf_baseline(instances: &[PredicateInstance], deprels: &Lexicon) -> Vec<Vec<usize>> {
    let clusters = SyntfClusters::fit(instances, deprels);
    instances
        .iter()
        .map(|inst| inst.args.iter().map(|a| clusters.cluster(a.deprel)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ArgumentInstance;

    fn corpus(deprels: &[&[usize]]) -> Vec<PredicateInstance> {
        deprels
            .iter()
            .enumerate()
            .map(|(s, rels)| PredicateInstance {
                predicate_id: 0,
                predicate: "p".into(),
                sentence_id: s,
                predicate_token: 1,
                args: rels
                    .iter()
                    .map(|&d| ArgumentInstance {
                        head_token: 2,
                        arg_lemma: 0,
                        feature_ids: vec![],
                        deprel: d,
                        gold_role: None,
                    })
                    .collect(),
            })
            .collect()
    }

    fn lexicon(n: usize) -> Lexicon {
        let mut lex = Lexicon::new("deprels", true);
        for i in 1..n {
            lex.insert(&format!("R{:02}", i));
        }
        lex
    }

    #[test]
    fn three_relations() {
        let inst = corpus(&[&[1, 2], &[3, 1]]);
        let labels = syntf_baseline(&inst, &lexicon(4));
        // R01 twice ranks first; R02 and R03 tie and sort by name
        assert_eq!(labels, vec![vec![0, 1], vec![2, 0]]);
        assert!(labels.iter().flatten().all(|&c| c != SYNTF_TOP_RELATIONS));
    }

    #[test]
    fn many_relations_use_catch_all() {
        let rels: Vec<usize> = (1..=25).collect();
        let inst = corpus(&[&rels]);
        let labels = syntf_baseline(&inst, &lexicon(26));
        let distinct: std::collections::BTreeSet<_> = labels[0].iter().copied().collect();
        assert_eq!(distinct.len(), 21);
        assert_eq!(labels[0][20..], [SYNTF_TOP_RELATIONS; 5]);
    }

    #[test]
    fn order_independent() {
        let a = corpus(&[&[1, 2, 2], &[3, 1, 4], &[4]]);
        let mut b = a.clone();
        b.reverse();
        let lex = lexicon(5);
        assert_eq!(SyntfClusters::fit(&a, &lex), SyntfClusters::fit(&b, &lex));
    }

    #[test]
    fn cluster_names() {
        let inst = corpus(&[&[2, 2, 1]]);
        let c = SyntfClusters::fit(&inst, &lexicon(3));
        assert_eq!(c.cluster_name(0), "R02");
        assert_eq!(c.cluster_name(c.catch_all()), "OTHER");
    }
}
