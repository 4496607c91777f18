//! Tree shapes and the order in which they are explored.

use std::fmt;

/// `n` binary trees of depth `d` under an n-ary concatenation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeShape {
    pub n: u32,
    pub d: u32,
}

impl TreeShape {
    pub fn new(n: u32, d: u32) -> Self {
        assert!(n >= 1 && d >= 1, "shape needs at least one tree of depth one");
        TreeShape { n, d }
    }

    /// Nodes in one tree: `2^d - 1`.
    pub fn tree_nodes(self) -> u32 {
        (1 << self.d) - 1
    }

    pub fn node_count(self) -> u32 {
        self.n * self.tree_nodes()
    }

    /// First leaf index in level order (nodes are numbered from 1).
    pub fn first_leaf(self) -> u32 {
        1 << (self.d - 1)
    }

    pub fn is_leaf(self, node: u32) -> bool {
        node >= self.first_leaf()
    }

    pub fn children(self, node: u32) -> Option<(u32, u32)> {
        (!self.is_leaf(node)).then_some((2 * node, 2 * node + 1))
    }
}

impl fmt::Display for TreeShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.n, self.d)
    }
}

/// Bounds on the explored shapes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShapeLimits {
    pub max_depth: u32,
    pub max_nodes: u32,
}

impl Default for ShapeLimits {
    fn default() -> Self {
        ShapeLimits { max_depth: 6, max_nodes: 40 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScheduleMode {
    /// Fixed number of trees, growing depth.
    Static(u32),
    /// All shapes by ascending node count, shallower first on ties.
    Dynamic,
}

/// Shapes to explore, starting at depth 2.
pub fn shape_schedule(mode: ScheduleMode, limits: ShapeLimits) -> impl Iterator<Item = TreeShape> {
    let shapes: Vec<TreeShape> = match mode {
        ScheduleMode::Static(n) => (2..=limits.max_depth).map(|d| TreeShape::new(n, d)).collect(),
        ScheduleMode::Dynamic => {
            let mut all = Vec::new();
            for d in 2..=limits.max_depth {
                let per_tree = (1u32 << d) - 1;
                for n in 1..=limits.max_nodes / per_tree {
                    all.push(TreeShape::new(n, d));
                }
            }
            all.sort_by_key(|s| (s.node_count(), s.d));
            all
        }
    };
    shapes.into_iter()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn static_schedule() {
        let s: Vec<_> = shape_schedule(ScheduleMode::Static(5), ShapeLimits::default()).collect();
        assert_eq!(s.first(), Some(&TreeShape::new(5, 2)));
        assert_eq!(s.len(), 5);
        assert!(s.iter().all(|x| x.n == 5));
    }

    #[test]
    fn tie_prefers_shallow() {
        let s: Vec<_> = shape_schedule(ScheduleMode::Dynamic, ShapeLimits::default()).collect();
        let a = s.iter().position(|&x| x == TreeShape::new(5, 2)).unwrap();
        let b = s.iter().position(|&x| x == TreeShape::new(1, 4)).unwrap();
        assert!(a < b);
    }

    #[test]
    fn node_limit() {
        let s: Vec<_> = shape_schedule(ScheduleMode::Dynamic, ShapeLimits::default()).collect();
        assert!(s.iter().all(|x| x.node_count() <= 40));
        assert_eq!(s.last().unwrap().node_count(), 39);
    }
}
