use std::f64::consts::PI;
use std::sync::Arc;

use super::*;
use crate::circuit::{build_fig1_circuit, GateKind};
use crate::device::{mock_device, validate_executable};
use crate::fom::FomKind;
use crate::qcbm::{build_ansatz, make_x_target, AnsatzSpec, TrainingConfig};

fn quito() -> DeviceModel {
    mock_device("quito").unwrap()
}

fn fresh() -> CompilationState {
    CompilationState::new(build_fig1_circuit(), Arc::new(quito()), DEFAULT_MAX_STEPS)
}

fn two_q() -> RewardSpec {
    RewardSpec::new(FigureOfMeritSpec::new(FomKind::TwoQubitCount))
}

const REF_LAYOUT: [usize; 4] = [3, 2, 4, 1];

#[test]
fn gating_rules() {
    let env = EnvConfig::default();
    let s = fresh();
    let acts = actions_available(&s, &env);
    for a in [PassAction::Translate, PassAction::MergeRz, PassAction::DropIdRz, PassAction::CancelPairs, PassAction::LayoutTrivial, PassAction::LayoutGreedy] {
        assert!(acts.contains(&a), "{a}");
    }
    assert!(acts.iter().any(|a| matches!(a, PassAction::LayoutRandom { .. })));
    assert!(!acts.contains(&PassAction::Route));
    assert!(matches!(step(&s, &PassAction::Route), Err(SearchError::IllegalAction(_))));

    let laid = step(&s, &PassAction::LayoutTrivial).unwrap();
    let acts = actions_available(&laid, &env);
    assert!(acts.contains(&PassAction::Route));
    assert!(!acts.iter().any(PassAction::is_layout));

    let mut spent = s.clone();
    spent.steps = spent.max_steps;
    assert!(actions_available(&spent, &env).is_empty());
}

#[test]
fn translate_then_merge_gives_three_halves_pi() {
    let s = step(&fresh(), &PassAction::Translate).unwrap();
    assert!(s.translated);
    assert!(validate_executable(&s.circuit, &quito()).non_native.is_empty());
    let s = step(&s, &PassAction::MergeRz).unwrap();
    let first_q0_rz = s.circuit.instructions().iter().find(|i| i.kind == GateKind::Rz && i.qubits == [0]).unwrap();
    assert!((first_q0_rz.angle().unwrap() - 1.5 * PI).abs() < 1e-12);
    assert_eq!(s.history, vec![PassAction::Translate, PassAction::MergeRz]);
    assert_eq!(s.steps, 2);
}

#[test]
fn reward_requires_terminal() {
    assert_eq!(terminal_reward(&fresh(), &two_q()), Err(SearchError::NotTerminal));
    let passes = PassAction::parse_list("translate;merge_rz;layout_fixed=3,2,4,1;route;translate").unwrap();
    let s = compile_with(&build_fig1_circuit(), &quito(), &passes).unwrap();
    assert!(s.is_terminal());
    assert_eq!(terminal_reward(&s, &two_q()).unwrap(), -7.0);
}

#[test]
fn action_text_round_trip() {
    for s in ["translate", "layout_random=17", "layout_fixed=3,2,4,1", "route", "cancel_pairs"] {
        assert_eq!(PassAction::parse(s).unwrap().to_string(), s);
    }
    assert!(PassAction::parse("unroll").is_err());
    assert!(PassAction::parse("layout_fixed=a,b").is_err());
}

#[test]
fn baselines_are_terminal_and_seeded() {
    let c = build_fig1_circuit();
    let o1 = run_baseline(Preset::O1Like, &c, &quito(), &two_q(), 0).unwrap();
    assert!(o1.terminal && validate_executable(&o1.circuit, &quito()).is_empty());
    let a = run_baseline(Preset::O3Like, &c, &quito(), &two_q(), 9).unwrap();
    let b = run_baseline(Preset::O3Like, &c, &quito(), &two_q(), 9).unwrap();
    assert_eq!(a, b);
    assert!(a.terminal);
}

#[test]
fn o3_not_worse_than_o1_on_most_seeds() {
    let c = build_fig1_circuit();
    let o1 = run_baseline(Preset::O1Like, &c, &quito(), &two_q(), 0).unwrap().reward.unwrap();
    let wins = (0..25)
        .filter(|&s| run_baseline(Preset::O3Like, &c, &quito(), &two_q(), s).unwrap().reward.unwrap() >= o1)
        .count();
    assert!(wins >= 20, "o3 matched o1 on {wins}/25 seeds");
}

#[test]
fn greedy_beam_reaches_terminal() {
    let (best, trace) = optimize_sequence(&Strategy::Beam { width: 1 }, &build_fig1_circuit(), &quito(), &two_q(), &EnvConfig::default(), 0).unwrap();
    assert!(best.terminal);
    assert!(validate_executable(&best.circuit, &quito()).is_empty());
    assert!(!trace.is_empty() && trace.iter().all(|r| r.terminal));
}

#[test]
fn beam_dominates_baselines() {
    let c = build_fig1_circuit();
    let env = EnvConfig { random_layout_seeds: (0..O3_LAYOUT_TRIALS).map(|k| crate::seed::derive_seed(0, "o3_layout", k)).collect(), ..Default::default() };
    let (best, _) = optimize_sequence(&Strategy::Beam { width: 4 }, &c, &quito(), &two_q(), &env, 0).unwrap();
    let o1 = run_baseline(Preset::O1Like, &c, &quito(), &two_q(), 0).unwrap();
    let o3 = run_baseline(Preset::O3Like, &c, &quito(), &two_q(), 0).unwrap();
    assert!(best.reward.unwrap() >= o1.reward.unwrap().max(o3.reward.unwrap()));
}

#[test]
fn exhaustive_search_finds_seven_with_reference_layout() {
    let env = EnvConfig { max_steps: 8, random_layout_seeds: vec![], fixed_layouts: vec![REF_LAYOUT.to_vec()] };
    let (best, _) = optimize_sequence(&Strategy::Beam { width: 100_000 }, &build_fig1_circuit(), &quito(), &two_q(), &env, 0).unwrap();
    assert_eq!(best.reward.unwrap(), -7.0);
    assert_eq!(best.circuit.count_two_qubit_gates(), 7);
}

#[test]
fn rl_deterministic_without_exploration() {
    let rl = Strategy::Rl(RlParams { episodes: 15, epsilon: 0.0, ..Default::default() });
    let c = build_fig1_circuit();
    let a = optimize_sequence(&rl, &c, &quito(), &two_q(), &EnvConfig::default(), 5);
    let b = optimize_sequence(&rl, &c, &quito(), &two_q(), &EnvConfig::default(), 5);
    assert_eq!(a, b);
    let explore = Strategy::Rl(RlParams { episodes: 40, epsilon: 0.3, ..Default::default() });
    let (best, trace) = optimize_sequence(&explore, &c, &quito(), &two_q(), &EnvConfig::default(), 5).unwrap();
    assert_eq!(trace.len(), 40);
    assert!(best.terminal && validate_executable(&best.circuit, &quito()).is_empty());
    let csv = trace_to_csv(&trace);
    assert!(csv.starts_with("episode,terminal,reward,passes\n"));
}

#[test]
fn improvement_formula() {
    assert_eq!(improvement(0.5, 1.0).unwrap(), 50.0);
    assert_eq!(improvement(0.3, 0.3).unwrap(), 0.0);
    assert!(improvement(0.2, 0.3).unwrap() > 0.0);
    assert!(improvement(0.4, 0.3).unwrap() < 0.0);
    assert!(matches!(improvement(0.1, 0.0), Err(SearchError::DivisionByZero(_))));
}

#[test]
fn app_kl_only_on_terminal_states() {
    let spec = AnsatzSpec { num_qubits: 4, num_layers: 1 };
    let c = build_ansatz(&spec).unwrap();
    let ctx = crate::fom::QcbmContext {
        target: make_x_target(4, 4).unwrap(),
        param_names: spec.param_names(),
        training: TrainingConfig { epochs: 0, ..Default::default() },
    };
    let reward = RewardSpec { fom: FigureOfMeritSpec::app_kl(0, None), qcbm: Some(ctx) };
    let s = CompilationState::new(c.clone(), Arc::new(quito()), DEFAULT_MAX_STEPS);
    assert_eq!(terminal_reward(&s, &reward), Err(SearchError::NotTerminal));
    let o1 = run_baseline(Preset::O1Like, &c, &quito(), &reward, 0).unwrap();
    // θ = 0 is Clifford and stays a product of |±> states under Pauli noise.
    assert!((o1.reward.unwrap() + std::f64::consts::LN_2).abs() < 1e-9);
    assert!(o1.circuit.free_symbols().len() == 4);
}
