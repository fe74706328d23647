//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use qdtree::dtree::{DecisionTree, Node, NodeId};

/// Tree shape as decoded by the reference decoder.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Leaf,
    Cond(Vec<f64>, f64, Box<Shape>, Box<Shape>),
}

/// Straightforward recursive decoder over the oblique grammar: coefficients
/// are -1 + 0.001 * (gene mod 2001), actions are leaf for even genes.
/// Returns the shape and genes consumed, or `None` when genes run out.
pub fn reference_decode(genes: &[u32], n_inputs: usize) -> Option<(Shape, usize)> {
    fn take(genes: &[u32], pos: &mut usize, l: u32) -> Option<u32> {
        let g = *genes.get(*pos)?;
        *pos += 1;
        Some(g % l)
    }
    fn coefficient(genes: &[u32], pos: &mut usize) -> Option<f64> {
        take(genes, pos, 2001).map(|c| -1.0 + 0.001 * c as f64)
    }
    fn cond(genes: &[u32], pos: &mut usize, n: usize) -> Option<Shape> {
        let mut w = Vec::new();
        for _ in 0..n {
            w.push(coefficient(genes, pos)?);
        }
        let t = coefficient(genes, pos)?;
        let yes = action(genes, pos, n)?;
        let no = action(genes, pos, n)?;
        Some(Shape::Cond(w, t, Box::new(yes), Box::new(no)))
    }
    fn action(genes: &[u32], pos: &mut usize, n: usize) -> Option<Shape> {
        match take(genes, pos, 2)? {
            0 => Some(Shape::Leaf),
            _ => cond(genes, pos, n),
        }
    }
    let mut pos = 0;
    cond(genes, &mut pos, n_inputs).map(|s| (s, pos))
}

pub fn shape_of(tree: &DecisionTree) -> Shape {
    fn go(tree: &DecisionTree, id: NodeId) -> Shape {
        match tree.node(id) {
            Node::Leaf { .. } => Shape::Leaf,
            Node::Condition { weights, threshold, on_true, on_false } => {
                Shape::Cond(weights.clone(), *threshold, Box::new(go(tree, *on_true)), Box::new(go(tree, *on_false)))
            }
        }
    }
    go(tree, tree.root())
}

/// Structural equality with coefficients compared to 1e-9.
pub fn same_shape(a: &Shape, b: &Shape) -> bool {
    match (a, b) {
        (Shape::Leaf, Shape::Leaf) => true,
        (Shape::Cond(w1, t1, y1, n1), Shape::Cond(w2, t2, y2, n2)) => {
            w1.len() == w2.len()
                && w1.iter().zip(w2).all(|(x, y)| (x - y).abs() < 1e-9)
                && (t1 - t2).abs() < 1e-9
                && same_shape(y1, y2)
                && same_shape(n1, n2)
        }
        _ => false,
    }
}

/// Tree with fixed greedy actions: each leaf has Q = 1 on its action, 0 elsewhere.
pub fn fixed_leaf(n_inputs: usize, action: usize, n_actions: usize) -> DecisionTree {
    let mut q = vec![0.0; n_actions];
    q[action] = 1.0;
    DecisionTree::leaf(n_inputs, q)
}
