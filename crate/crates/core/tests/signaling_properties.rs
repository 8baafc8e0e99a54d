use std::sync::LazyLock;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use smithian_core::pomdp::*;
use smithian_core::signaling::*;
use smithian_core::wumpus::*;

static GAME: LazyLock<SolvedGame> =
    LazyLock::new(|| SolvedGame::solve(&GameConfig::with_cost(-3.0), &SolverConfig::default()).unwrap().0);

const STENCH: usize = 0;

fn playing(hunter: Tile, w: Tile) -> usize {
    WumpusState::Playing { hunter, wumpus: w }.encode()
}

/// Belief with the hunter at `h` and weights over the three Wumpus tiles.
fn at(h: Tile, w: [f64; 3]) -> Belief {
    let mut p = vec![0.0; N_STATES];
    for (k, &t) in WUMPUS_TILES.iter().enumerate() {
        p[playing(h, t)] = w[k];
    }
    Belief::from_weights(p).unwrap()
}

fn certain<'a>(game: &'a SolvedGame, truth: usize, b_rec: Belief) -> SignalingContext<'a> {
    SignalingContext::certain(&game.model, truth, b_rec, &game.policy, &game.continuation)
}

fn literal(game: &SolvedGame) -> LiteralReceiver<'_> {
    LiteralReceiver { model: &game.model, last_action: WumpusAction::MoveVertical.index(), last_observation: STENCH }
}

/// A receiver belief at (1,0) for which POINT flips the hunter toward the
/// true Wumpus at (1,1), found by scanning a grid of beliefs.
fn flip_scenario() -> (Belief, usize, f64) {
    let game = &*GAME;
    let h = (1, 0);
    let truth = playing(h, (1, 1));
    for i in 1..20 {
        for j in 1..20 - i {
            let b = at(h, [i as f64, j as f64, (20 - i - j) as f64]);
            let ctx = certain(game, truth, b.clone());
            let gain = svi(&ctx, Signal::Point, &literal(game)).unwrap();
            if gain > 1.0 {
                return (b, truth, gain);
            }
        }
    }
    panic!("no belief at (1,0) where pointing helps");
}

fn arb_simplex3() -> impl Strategy<Value = [f64; 3]> {
    (0.01f64..1.0, 0.01f64..1.0, 0.01f64..1.0).prop_map(|(a, b, c)| {
        let s = a + b + c;
        [a / s, b / s, c / s]
    })
}

#[test]
fn smithian_action_utility_examples() {
    let game = &*GAME;
    let b_rec = at((0, 1), [1.0, 1.0, 1.0]);
    let right = WumpusAction::ShootRight.index();
    let hit = certain(game, playing((0, 1), (1, 1)), b_rec.clone());
    let miss = certain(game, playing((0, 1), (0, 2)), b_rec);
    assert_eq!(smithian_utility_of_action(&hit, right).unwrap(), 100.0);
    assert_eq!(smithian_utility_of_action(&miss, right).unwrap(), -100.0);
}

#[test]
fn informed_receiver_gets_the_optimal_value() {
    let game = &*GAME;
    for h in HUNTER_TILES {
        for w in WUMPUS_TILES {
            let s = playing(h, w);
            let truth = Belief::degenerate(N_STATES, s);
            let ctx = certain(game, s, truth.clone());
            let u = smithian_utility_of_belief(&ctx, &truth).unwrap();
            assert!((u - game.continuation.get(s)).abs() < 1e-6, "{h:?} {w:?}: {u} vs {}", game.continuation.get(s));
        }
    }
}

#[test]
fn mistaken_receiver_shoots_and_misses() {
    let game = &*GAME;
    // hunter at (0,1) sure the Wumpus is above; it is actually to the right
    let wrong = Belief::degenerate(N_STATES, playing((0, 1), (0, 2)));
    let truth = playing((0, 1), (1, 1));
    assert!(WumpusAction::from_index(game.policy.greedy_action(&wrong)).unwrap().is_shot());
    let ctx = certain(game, truth, wrong.clone());
    assert_eq!(smithian_utility_of_belief(&ctx, &wrong).unwrap(), -100.0);
    let q = expectimax_q_values(&game.model, &Belief::degenerate(N_STATES, truth), 6).unwrap();
    assert_eq!(q[game.policy.greedy_action(&wrong)], -100.0);
}

#[test]
fn svi_matches_oracle_when_pointing_flips_the_action() {
    let game = &*GAME;
    let (b, truth, gain) = flip_scenario();
    let after = literal_interpret(&game.model, &b, Signal::Point, STENCH, WumpusAction::MoveVertical.index()).unwrap();
    let before_a = game.policy.greedy_action(&b);
    let after_a = game.policy.greedy_action(&after);
    assert_ne!(before_a, after_a);
    let q = expectimax_q_values(&game.model, &Belief::degenerate(N_STATES, truth), 6).unwrap();
    assert!((gain - (q[after_a] - q[before_a])).abs() < 1e-6, "svi {gain}, oracle {}", q[after_a] - q[before_a]);

    let dist = signaler_distribution(&certain(game, truth, b), &SignalerConfig::new(10.0).unwrap(), &literal(game))
        .unwrap();
    assert!(dist.p(Signal::Point) > 0.99);
}

#[test]
fn svi_vanishes_when_belief_is_unchanged_or_already_true() {
    let game = &*GAME;
    let b = at((0, 1), [0.4, 0.4, 0.2]);
    let ctx = certain(game, playing((0, 1), (2, 0)), b.clone());
    assert_eq!(svi(&ctx, Signal::NoPoint, &literal(game)).unwrap(), 0.0);

    let s = playing((0, 1), (0, 2));
    let known = Belief::degenerate(N_STATES, s);
    let ctx = certain(game, s, known);
    for u in Signal::ALL {
        assert_eq!(svi(&ctx, u, &literal(game)).unwrap(), 0.0);
    }
    let dist = signaler_distribution(&ctx, &SignalerConfig::default(), &literal(game)).unwrap();
    assert_eq!(dist.probs, [0.5, 0.5]);
}

#[test]
fn signaler_limits() {
    let game = &*GAME;
    let (b, truth, _) = flip_scenario();
    let ctx = certain(game, truth, b);
    let zero = signaler_distribution(&ctx, &SignalerConfig::new(0.0).unwrap(), &literal(game)).unwrap();
    assert_eq!(zero.probs, [0.5, 0.5]);
    let inf = signaler_distribution(&ctx, &SignalerConfig::new(f64::INFINITY).unwrap(), &literal(game)).unwrap();
    assert_eq!(inf.probs, [1.0, 0.0]);

    // equal SVI ties go to NO_POINT in the argmax limit
    let s = playing((1, 0), (2, 0));
    let tied = certain(game, s, Belief::degenerate(N_STATES, s));
    let inf = signaler_distribution(&tied, &SignalerConfig::new(f64::INFINITY).unwrap(), &literal(game)).unwrap();
    assert_eq!(inf.probs, [0.0, 1.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (u, _) = guide_step(&tied, &SignalerConfig::new(f64::INFINITY).unwrap(), &literal(game), &mut rng).unwrap();
    assert_eq!(u, Signal::NoPoint);
}

#[test]
fn two_point_softmax_closed_form() {
    let game = &*GAME;
    let (b, truth, _) = flip_scenario();
    let ctx = certain(game, truth, b);
    let dist = signaler_distribution(&ctx, &SignalerConfig::new(1.0).unwrap(), &literal(game)).unwrap();
    let d = dist.svi_of(Signal::Point) - dist.svi_of(Signal::NoPoint);
    assert!((dist.p(Signal::Point) - 1.0 / (1.0 + (-d).exp())).abs() < 1e-15);
}

#[test]
fn literal_double_stench_example() {
    let game = &*GAME;
    let b = belief_update(&game.model, &initial_belief(), WumpusAction::MoveVertical.index(), STENCH).unwrap();
    let after = literal_interpret(&game.model, &b, Signal::Point, STENCH, WumpusAction::MoveVertical.index()).unwrap();
    let expect = [0.7225 / 1.4675, 0.7225 / 1.4675, 0.0225 / 1.4675];
    for (k, w) in WUMPUS_TILES.iter().enumerate() {
        assert!((after.get(playing((0, 1), *w)) - expect[k]).abs() < 1e-12);
    }
    assert!((expect[0] - 0.4923).abs() < 1e-4 && (expect[2] - 0.0153).abs() < 1e-4);
    assert_eq!(literal_interpret(&game.model, &b, Signal::NoPoint, STENCH, 0).unwrap(), b);
    let d = Belief::degenerate(N_STATES, playing((0, 1), (2, 0)));
    assert_eq!(literal_interpret(&game.model, &d, Signal::Point, STENCH, 0).unwrap(), d);
}

#[test]
fn pragmatic_shift_grows_with_alpha() {
    let game = &*GAME;
    let (b, _, _) = flip_scenario();
    let lit = literal(game);
    let gaps: Vec<(usize, f64)> = b
        .support()
        .map(|s| {
            let ctx = certain(game, s, b.clone());
            let d = signaler_distribution(&ctx, &SignalerConfig::new(1.0).unwrap(), &lit).unwrap();
            (s, d.svi_of(Signal::Point) - d.svi_of(Signal::NoPoint))
        })
        .collect();
    let &(hi, g_hi) = gaps.iter().max_by(|x, y| x.1.total_cmp(&y.1)).unwrap();
    let &(lo, g_lo) = gaps.iter().min_by(|x, y| x.1.total_cmp(&y.1)).unwrap();
    assert!(g_hi > 0.0 && g_lo <= 0.0, "gaps {gaps:?}");
    // keep α·gap well inside the unsaturated range of the logistic
    let step = 1.0 / g_hi.max(-g_lo);
    let mut last = f64::NEG_INFINITY;
    for k in 1..=10 {
        let cfg = SignalerConfig::new(k as f64 * step).unwrap();
        let prag = PragmaticReceiver::level2(&game.model, &b, &game.policy, &game.continuation, &cfg, &lit).unwrap();
        let post = prag.interpret(&b, Signal::Point).unwrap();
        let odds = post.get(hi) / post.get(lo);
        assert!(odds > last, "alpha {}: odds {odds} after {last}", cfg.alpha);
        last = odds;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn pragmatic_update_is_bayes(prior in prop::collection::vec(0.0f64..1.0, 2..8), seed in any::<u64>(), point in any::<bool>()) {
        prop_assume!(prior.iter().sum::<f64>() > 1e-6);
        let b = Belief::from_weights(prior).unwrap();
        let lik: Vec<f64> = (0..b.dim()).map(|s| 0.01 + 0.98 * ((seed.rotate_left(7 * s as u32) % 1000) as f64 / 1000.0)).collect();
        let u = if point { Signal::Point } else { Signal::NoPoint };
        let f = |s: usize| [lik[s], 1.0 - lik[s]];
        let got = pragmatic_interpret(&b, u, f).unwrap();
        let raw: Vec<f64> = b.probs().iter().enumerate().map(|(s, p)| p * f(s)[u.index()]).collect();
        let z: f64 = raw.iter().sum();
        for (g, r) in got.probs().iter().zip(&raw) {
            prop_assert!((g - r / z).abs() <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reduction_to_expected_utility(w in prop::array::uniform9(0.0f64..1.0)) {
        prop_assume!(w.iter().sum::<f64>() > 1e-6);
        let game = &*GAME;
        let mut p = w.to_vec();
        p.push(0.0);
        let b = Belief::from_weights(p).unwrap();
        let ctx = SignalingContext {
            model: &game.model,
            signaler_belief: b.clone(),
            receiver_belief: b.clone(),
            receiver_policy: &game.policy,
            utility: OutcomeUtility::PolicyLookahead,
            prediction: ActionPrediction::Greedy,
        };
        let m = &game.model;
        for a in 0..m.n_actions() {
            // R(b,a) + γ Σ_o Σ_s' P(o|s') P(s'|b,a) V(b'), enumerated directly
            let mut oracle: f64 = (0..N_STATES).map(|s| b.get(s) * m.reward(s, a)).sum();
            for o in 0..m.n_observations() {
                let joint: Vec<f64> = (0..N_STATES)
                    .map(|n| (0..N_STATES).map(|s| b.get(s) * m.transition(s, a, n)).sum::<f64>() * m.observation_prob(n, a, o))
                    .collect();
                let po: f64 = joint.iter().sum();
                if po > 0.0 {
                    let next = Belief::from_weights(joint).unwrap();
                    oracle += m.discount() * po * game.policy.value(&next);
                }
            }
            let got = smithian_utility_of_action(&ctx, a).unwrap();
            prop_assert!((got - oracle).abs() <= 1e-9, "action {a}: {got} vs {oracle}");
        }
    }

    #[test]
    fn svi_equals_recomputed_difference(w in arb_simplex3(), h in 0usize..3, truth in 0usize..3, point in any::<bool>()) {
        let game = &*GAME;
        let tile = HUNTER_TILES[h];
        let b = at(tile, w);
        let s = playing(tile, WUMPUS_TILES[truth]);
        let u = if point { Signal::Point } else { Signal::NoPoint };
        let lit = literal(game);
        let direct = svi(&certain(game, s, b.clone()), u, &lit).unwrap();
        let after = lit.interpret(&b, u).unwrap();
        let fresh_after = smithian_utility_of_belief(&certain(game, s, after.clone()), &after).unwrap();
        let fresh_before = smithian_utility_of_belief(&certain(game, s, b.clone()), &b).unwrap();
        prop_assert!((direct - (fresh_after - fresh_before)).abs() <= 1e-9);
    }

    #[test]
    fn signaler_distribution_is_proper(w in arb_simplex3(), h in 0usize..3, truth in 0usize..3, alpha in 0.0f64..50.0) {
        let game = &*GAME;
        let tile = HUNTER_TILES[h];
        let ctx = certain(game, playing(tile, WUMPUS_TILES[truth]), at(tile, w));
        let d = signaler_distribution(&ctx, &SignalerConfig::new(alpha).unwrap(), &literal(game)).unwrap();
        prop_assert!((d.probs[0] + d.probs[1] - 1.0).abs() <= 1e-12);
        prop_assert!(d.probs.iter().all(|p| (0.0..=1.0).contains(p)));
        let gap = (d.svi[0] - d.svi[1]).abs();
        // strictly positive wherever e^{-α·gap} is representable
        if alpha * gap < 700.0 {
            prop_assert!(d.probs.iter().all(|&p| p > 0.0), "alpha {alpha}, gap {gap}, {:?}", d.probs);
        }
    }

    #[test]
    fn literal_point_squares_the_likelihood(w in prop::array::uniform9(0.01f64..1.0), a in 0usize..2) {
        let game = &*GAME;
        let m = &game.model;
        let mut p = w.to_vec();
        p.push(0.0);
        let b = Belief::from_weights(p).unwrap();
        let once = belief_update(m, &b, a, STENCH).unwrap();
        let twice = literal_interpret(m, &once, Signal::Point, STENCH, a).unwrap();
        let pred = predict(m, &b, a);
        let sq: Vec<f64> = pred.iter().enumerate().map(|(n, q)| q * m.observation_prob(n, a, STENCH).powi(2)).collect();
        let z: f64 = sq.iter().sum();
        for (t, s) in twice.probs().iter().zip(&sq) {
            prop_assert!((t - s / z).abs() <= 1e-12);
        }
    }
}
