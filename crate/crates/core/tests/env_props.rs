use rand::Rng;
use smooth_lsvi::env::{
    grid_dp_oracle, make_constant, make_smooth_chain, make_trig_bandit, GenerativeModel, CHAIN_DRIFT, CHAIN_NOISE_SCALE,
};
use smooth_lsvi::rng::{stream, Purpose};

fn shipped() -> Vec<Box<dyn GenerativeModel>> {
    vec![
        Box::new(make_trig_bandit()),
        Box::new(make_smooth_chain(3, CHAIN_DRIFT, CHAIN_NOISE_SCALE).unwrap()),
        Box::new(make_constant(0.5, 2).unwrap()),
    ]
}

#[test]
fn rewards_and_next_states_in_range() {
    for model in shipped() {
        let mut rng = stream(1, Purpose::Custom(3), 0, 0);
        for _ in 0..100_000 {
            let s: Vec<f64> = (0..model.d_state()).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let a: Vec<f64> = (0..model.d_action()).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let h = rng.random_range(1..=model.horizon());
            let t = model.sample(&s, &a, h, &mut rng);
            assert!((0.0..=1.0).contains(&t.reward), "{}: {}", model.name(), t.reward);
            assert!(t.next_state.iter().all(|x| (-1.0..1.0).contains(x)), "{:?}", t.next_state);
        }
    }
}

#[test]
fn same_stream_same_transitions() {
    let chain = make_smooth_chain(3, CHAIN_DRIFT, CHAIN_NOISE_SCALE).unwrap();
    let run = || {
        let mut rng = stream(5, Purpose::Custom(4), 0, 0);
        (0..100).map(|i| chain.sample(&[0.01 * i as f64], &[0.3], 1, &mut rng).next_state[0]).collect::<Vec<_>>()
    };
    assert_eq!(run(), run());
}

#[test]
fn bandit_oracle_value() {
    let oracle = grid_dp_oracle(&make_trig_bandit(), 200, 1, 0).unwrap();
    assert!((oracle.value_at(1, &[0.3]) - 1.0).abs() <= 1e-3);
}
