//! Experiment families as plain lists of configs. Each one can be dumped to
//! JSON and rerun with `peerlab compare`.

use super::config::ExperimentConfig;
use crate::peer::{MechanismSet, SelectionRule};
use crate::zoo::AgentKind;

fn mechanisms_of(base: &ExperimentConfig) -> MechanismSet {
    match base.selection {
        SelectionRule::Peer(m) => m,
        _ => MechanismSet::all(true),
    }
}

/// A one-learner run: the plain off-policy baseline.
pub fn single(base: &ExperimentConfig) -> ExperimentConfig {
    base.clone().with_name("single").with_learners(1)
}

/// Peer group of `base`'s size next to the single-agent baseline.
pub fn peer_vs_single(base: &ExperimentConfig) -> Vec<ExperimentConfig> {
    let peer = base.clone().with_name("peer");
    vec![peer, single(base)]
}

/// Three learners with and without a poisoner, under trust-based and
/// random-advice selection, plus the single agent.
pub fn adversary(base: &ExperimentConfig) -> Vec<ExperimentConfig> {
    let peer = SelectionRule::Peer(mechanisms_of(base));
    let with_adv = |cfg: ExperimentConfig| {
        let mut cfg = cfg;
        cfg.agents.push(AgentKind::Adversarial);
        cfg
    };
    let mut trust = base.clone().with_learners(3);
    trust.selection = peer;
    let mut random = base.clone().with_learners(3);
    random.selection = SelectionRule::RandomAdvice;
    vec![
        trust.clone().with_name("peer"),
        with_adv(trust).with_name("peer_adversary"),
        random.clone().with_name("random"),
        with_adv(random).with_name("random_adversary"),
        single(base),
    ]
}

/// Two learners advised by each other, a shortest-path expert and a frozen
/// random novice. Advantage is switched on.
pub fn expert_study(base: &ExperimentConfig) -> ExperimentConfig {
    let mut cfg = base.clone().with_name("expertstudy");
    let mut mechs = mechanisms_of(base);
    mechs.advantage = true;
    cfg.selection = SelectionRule::Peer(mechs);
    let expert = if base.expert_checkpoint.is_some() {
        AgentKind::ExpertFrozen
    } else {
        AgentKind::OracleExpert
    };
    cfg.agents = vec![
        AgentKind::Learner,
        AgentKind::Learner,
        expert,
        AgentKind::NoviceFrozen,
    ];
    cfg
}

/// Every mechanism combination with and without advantage, then the single
/// agent and random advice: 16 rows.
pub fn ablation(base: &ExperimentConfig) -> Vec<ExperimentConfig> {
    let mut out = Vec::with_capacity(16);
    for advantage in [true, false] {
        for m in MechanismSet::combinations(advantage) {
            let mut cfg = base.clone().with_name(m.to_string());
            cfg.selection = SelectionRule::Peer(m);
            out.push(cfg);
        }
    }
    out.push(single(base));
    let mut random = base.clone().with_name("random");
    random.selection = SelectionRule::RandomAdvice;
    out.push(random);
    out
}

pub const GROUP_SIZES: [usize; 5] = [2, 4, 6, 8, 10];

pub fn group_sizes(base: &ExperimentConfig, sizes: &[usize]) -> Vec<ExperimentConfig> {
    sizes
        .iter()
        .map(|&n| base.clone().with_name(format!("n{n}")).with_learners(n))
        .collect()
}

/// Early advising with the default budget, for comparison tables.
pub fn early_advising(base: &ExperimentConfig, budget: u64) -> ExperimentConfig {
    let mut cfg = base.clone().with_name("early_advising");
    cfg.selection = SelectionRule::EarlyAdvising { budget };
    cfg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ablation_has_sixteen_rows_in_table_order() {
        let rows = ablation(&ExperimentConfig::default());
        let names: Vec<&str> = rows.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(
            names,
            [
                "ACT+adv", "AC+adv", "AT+adv", "CT+adv", "C+adv", "A+adv", "T+adv", "ACT", "AC",
                "AT", "CT", "C", "A", "T", "single", "random"
            ]
        );
        assert!(rows.iter().all(|c| c.validate().is_ok()));
    }

    #[test]
    fn study_groups() {
        let base = ExperimentConfig::default();
        let e = expert_study(&base);
        assert_eq!(e.learner_count(), 2);
        assert_eq!(e.agents[2], AgentKind::OracleExpert);
        let adv = adversary(&base);
        assert_eq!(
            adv[1].agents,
            [
                AgentKind::Learner,
                AgentKind::Learner,
                AgentKind::Learner,
                AgentKind::Adversarial
            ]
        );
        assert_eq!(adv[3].selection, SelectionRule::RandomAdvice);
        let g = group_sizes(&base, &GROUP_SIZES);
        assert_eq!(
            g.iter().map(|c| c.agents.len()).collect::<Vec<_>>(),
            GROUP_SIZES
        );
        let p = peer_vs_single(&base);
        assert_eq!(p[1].agents.len(), 1);
    }

    #[test]
    fn presets_survive_json() {
        for cfg in ablation(&ExperimentConfig::default()) {
            assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        }
    }
}
