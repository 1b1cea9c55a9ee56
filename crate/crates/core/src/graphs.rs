//! Unit-conductance test families.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::network::Network;
use crate::rng::stream_rng;

/// Path `0 – 1 – … – (n−1)`.
pub fn path(n: usize) -> Network {
    Network::unit(n, (1..n).map(|v| (v - 1, v)), 0).expect("path is connected")
}

/// Star with center 0 and leaves `1..=leaves`.
pub fn star(leaves: usize) -> Network {
    Network::unit(leaves + 1, (1..=leaves).map(|v| (0, v)), 0).expect("star is connected")
}

pub fn cycle(n: usize) -> Network {
    assert!(n >= 3);
    Network::unit(n, (0..n).map(|v| (v, (v + 1) % n)), 0).expect("cycle is connected")
}

pub fn complete(n: usize) -> Network {
    let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
    Network::unit(n, edges, 0).expect("complete graph is connected")
}

/// Complete binary tree of the given depth rooted at 0 (heap numbering);
/// `2^(depth+1) − 1` vertices.
pub fn binary_tree(depth: u32) -> Network {
    let n = (1usize << (depth + 1)) - 1;
    Network::unit(n, (1..n).map(|v| ((v - 1) / 2, v)), 0).expect("tree is connected")
}

/// `w × h` grid graph.
pub fn grid(w: usize, h: usize) -> Network {
    let id = |x: usize, y: usize| y * w + x;
    let mut edges = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if x + 1 < w {
                edges.push((id(x, y), id(x + 1, y)));
            }
            if y + 1 < h {
                edges.push((id(x, y), id(x, y + 1)));
            }
        }
    }
    Network::unit(w * h, edges, 0).expect("grid is connected")
}

/// Random recursive tree: vertex `v` attaches to a uniform earlier vertex.
pub fn random_tree(n: usize, seed: u64) -> Network {
    let mut rng = stream_rng(seed, 0x7EE, 0);
    Network::unit(n, (1..n).map(|v| (rng.gen_range(0..v), v)), 0).expect("tree is connected")
}

/// Connected graph of maximum degree exactly 3: a Hamiltonian cycle plus a
/// random partial matching of chords.
pub fn random_cubic_like(n: usize, seed: u64) -> Network {
    assert!(n >= 4);
    let mut rng = stream_rng(seed, 0xC0B, 0);
    let mut edges: Vec<(usize, usize)> = (0..n).map(|v| (v, (v + 1) % n)).collect();
    let mut verts: Vec<usize> = (0..n).collect();
    verts.shuffle(&mut rng);
    for pair in verts.chunks_exact(2) {
        let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
        let adjacent = b - a == 1 || (a == 0 && b == n - 1);
        if !adjacent {
            edges.push((a, b));
        }
    }
    Network::unit(n, edges, 0).expect("cycle keeps it connected")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_sizes() {
        assert_eq!(binary_tree(3).vertex_count(), 15);
        assert!(binary_tree(3).is_tree());
        assert_eq!(binary_tree(3).tree_shape().unwrap().diameter(), 6);
        assert_eq!(grid(3, 4).edge_count(), 17);
        assert_eq!(complete(4).edge_count(), 6);
        assert!(random_tree(30, 1).is_tree());
        let g = random_cubic_like(30, 9);
        assert_eq!(g.max_degree(), 3);
    }
}
