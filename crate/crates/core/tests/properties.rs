use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use dsynth::annotation::{check_annotation, is_witness, AnnotatedStrategy};
use dsynth::dstates::classify;
use dsynth::fixtures;
use dsynth::game::{GameSpec, ParityTreeAutomaton};
use dsynth::io::format::{parse_arena, parse_game, parse_spec, parse_strategy, write_arena, write_game, write_spec, write_strategy};
use dsynth::progress::{check_measure, compute_measure};
use dsynth::random::{random_annotated, random_game, random_observable_instance, random_retraction, random_spec, seeded, GameShape, SpecShape};
use dsynth::retraction::{check_monotone, check_retraction, image_annotated, retract};
use dsynth::solvers::one_player::{solve_one_player, Mode, Outcome};
use dsynth::solvers::parity::{check_solution, solve_parity, Owner, ParityArena};
use dsynth::strategy::check_strategy;

fn parity_instance(seed: u64) -> (GameSpec, ParityTreeAutomaton, Option<AnnotatedStrategy>) {
    let mut rng = seeded(seed);
    let game = fixtures::full_game();
    let shape = SpecShape { states: rng.gen_range(1..=4), priorities: 4, min_options: 1, max_options: 2 };
    let spec = random_spec(&mut rng, &game, shape);
    let nodes = rng.gen_range(1..=6);
    let a = random_annotated(&mut rng, &game, &spec, nodes, 30);
    (game, spec, a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn measure_exists_iff_witness(seed in any::<u64>()) {
        let (_, spec, a) = parity_instance(seed);
        if let Some(a) = a {
            let mu = compute_measure(&a, &spec);
            prop_assert_eq!(mu.is_some(), is_witness(&a, &spec).is_ok());
            if let Some(mu) = mu {
                prop_assert_eq!(check_measure(&a, &spec, &mu), Ok(()));
            }
        }
    }

    #[test]
    fn valid_retraction_images_are_annotated(seed in any::<u64>()) {
        let (game, spec, a) = parity_instance(seed);
        let Some(a) = a else { return Ok(()) };
        let mut rng = seeded(seed ^ 1);
        let h = random_retraction(&mut rng, &a, 3);
        if check_retraction(&a, &game, &spec, &h).is_ok() {
            let (img, _) = image_annotated(&a, &h);
            prop_assert_eq!(check_strategy(&img.strategy, &game), Ok(()));
            prop_assert_eq!(check_annotation(&img, &game, &spec), Ok(()));
        }
    }

    #[test]
    fn monotone_retraction_keeps_witness(seed in any::<u64>()) {
        let (game, spec, a) = parity_instance(seed);
        let Some(a) = a else { return Ok(()) };
        let Some(mu) = compute_measure(&a, &spec) else { return Ok(()) };
        let mut rng = seeded(seed ^ 2);
        let h = random_retraction(&mut rng, &a, 3);
        if check_retraction(&a, &game, &spec, &h).is_ok() && check_monotone(&a, &spec, &mu, &h).is_ok() {
            let r = retract(&a, &game, &spec, &mu, &h).unwrap();
            prop_assert_eq!(is_witness(&r.annotated, &spec), Ok(()));
        }
    }

    #[test]
    fn renaming_keeps_class_structure(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let game = random_game(&mut rng, GameShape { players: 2, actions: 2, directions: 2, observer_states: 2, outputs: 2 });
        let spec = random_spec(&mut rng, &game, SpecShape { states: 2, priorities: 2, min_options: 1, max_options: 1 });
        let Some(a) = random_annotated(&mut rng, &game, &spec, 4, 24) else { return Ok(()) };
        let mut perm: Vec<usize> = (0..a.len()).collect();
        perm.shuffle(&mut rng);
        let b = a.renamed(&perm);
        let (ra, rb) = (classify(&a, &game).unwrap(), classify(&b, &game).unwrap());
        prop_assert_eq!(ra.index(), rb.index());
        let mut sa: Vec<usize> = ra.dstates.iter().map(|k| k.len()).collect();
        let mut sb: Vec<usize> = rb.dstates.iter().map(|k| k.len()).collect();
        sa.sort_unstable();
        sb.sort_unstable();
        prop_assert_eq!(sa, sb);
    }

    #[test]
    fn game_and_strategy_round_trip(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let game = random_game(&mut rng, GameShape { players: 2, actions: 2, directions: 2, observer_states: 3, outputs: 2 });
        let mut spec = random_spec(&mut rng, &game, SpecShape { states: 3, priorities: 3, min_options: 0, max_options: 2 });
        spec.renormalize();
        let file = dsynth::io::format::GameFile { game, spec: None, delay: None };
        let back = parse_game(&write_game(&file)).unwrap();
        prop_assert_eq!(&back.game, &file.game);
        let spec_back = parse_spec(&write_spec(&file, &spec), &file).unwrap();
        prop_assert_eq!(&spec_back.transitions, &spec.transitions);
        prop_assert_eq!(&spec_back.priorities, &spec.priorities);
        if let Some(a) = random_annotated(&mut rng, &file.game, &spec, 4, 20) {
            let text = write_strategy(&file.game, &a.strategy, Some((&a.labels, &spec)), None);
            let parsed = parse_strategy(&text, &file.game, Some(&spec)).unwrap();
            prop_assert_eq!(&parsed.strategy.edges, &a.strategy.edges);
            prop_assert_eq!(&parsed.strategy.choice, &a.strategy.choice);
            prop_assert_eq!(parsed.labels.as_ref(), Some(&a.labels));
        }
    }

    #[test]
    fn parity_solution_checks(seed in any::<u64>(), n in 1usize..12) {
        let mut rng = seeded(seed);
        let mut arena = ParityArena::new();
        for i in 0..n {
            let owner = if rng.gen_bool(0.5) { Owner::Even } else { Owner::Odd };
            arena.add_position(format!("p{i}"), owner, rng.gen_range(0..4));
        }
        for i in 0..n {
            for _ in 0..rng.gen_range(1..=3) {
                let j = rng.gen_range(0..n);
                if !arena.moves[i].contains(&j) {
                    arena.add_move(i, j);
                }
            }
        }
        let sol = solve_parity(&arena);
        prop_assert!(check_solution(&arena, &sol));
        let back = parse_arena(&write_arena(&arena)).unwrap();
        prop_assert_eq!(solve_parity(&back).even_wins, sol.even_wins);
    }

    #[test]
    fn one_player_dstates_are_bounded(seed in any::<u64>()) {
        let (game, spec) = random_observable_instance(&mut seeded(seed));
        if let Outcome::Winning(c) = solve_one_player(&game, &spec, Mode::Observable).unwrap() {
            let report = classify(&c.annotated, &game).unwrap();
            prop_assert!(report.max_dstate_size() <= game.observers[0].num_states() * spec.num_states());
        }
    }
}
