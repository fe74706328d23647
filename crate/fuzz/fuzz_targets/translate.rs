#![no_main]

use libfuzzer_sys::fuzz_target;
use qdtree::dtree::RlParams;
use qdtree::envs::EnvKind;
use qdtree::eval::{rollout, Evaluator};
use qdtree::grammar::Genotype;

// Bytes become genes (4 bytes each); the first byte picks the task.
fuzz_target!(|data: &[u8]| {
    let Some((&pick, rest)) = data.split_first() else { return };
    let env = if pick & 1 == 0 { EnvKind::CartPole } else { EnvKind::MountainCar };
    let genes: Vec<u32> = rest.chunks_exact(4).map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]) % 40001).collect();
    let Ok(genotype) = Genotype::new(genes, 40000) else { return };
    let ev = Evaluator::new(env, RlParams::cartpole(), 1);
    let Ok((mut tree, used)) = ev.grammar.translate_counted(&genotype) else { return };
    assert!(used <= genotype.len());
    assert_eq!(tree.leaf_count(), tree.condition_count() + 1);
    let mut rng = Evaluator::learner_rng(u64::from(pick));
    tree.init_q(&ev.rl, &mut rng);
    rollout(&mut tree, env, &ev.rl, 1, u64::from(pick), &mut rng, None);
    let s = tree.simplify();
    assert_eq!(s.simplify(), s);
    assert!(s.depth() <= tree.depth());
    let _ = s.render(env.action_names());
});
