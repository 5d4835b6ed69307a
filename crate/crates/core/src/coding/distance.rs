//! Minimum Hamming distance of convolutional codes.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::conv::{ConvCode, Trellis};

/// Minimum distance of a code, both unconstrained and within a terminated
/// frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinDistance {
    /// Free distance of the unterminated code.
    pub free: u32,
    /// Minimum nonzero codeword weight for the requested frame length.
    pub frame: u32,
    /// The frame is too short for any free-distance error event to fit,
    /// so `frame > free`.
    pub frame_limited: bool,
}

impl MinDistance {
    /// Squared Euclidean distance of the closest BPSK codeword pair at unit
    /// symbol energy.
    pub fn euclidean_sq(&self) -> f64 {
        4.0 * self.frame as f64
    }
}

/// Free distance by a shortest-path search over the state graph: leave the
/// zero state on input 1 and return to it with the least output weight.
/// Returns `None` when no path returns, which cannot happen for feed-forward
/// codes but is kept for robustness.
pub fn free_distance(code: &ConvCode) -> Option<u32> {
    let trellis = Trellis::new(code);
    let mut dist = vec![u32::MAX; trellis.num_states];
    let mut heap = BinaryHeap::new();
    let start = trellis.next[0][1];
    let w0 = trellis.labels[0][1].count_ones();
    if start == 0 {
        return Some(w0);
    }
    dist[start] = w0;
    heap.push(Reverse((w0, start)));
    let mut best = u32::MAX;
    while let Some(Reverse((d, s))) = heap.pop() {
        if d > dist[s] || d >= best {
            continue;
        }
        for bit in 0..2 {
            let nd = d + trellis.labels[s][bit].count_ones();
            let ns = trellis.next[s][bit];
            if ns == 0 {
                best = best.min(nd);
            } else if nd < dist[ns] {
                dist[ns] = nd;
                heap.push(Reverse((nd, ns)));
            }
        }
    }
    (best != u32::MAX).then_some(best)
}

/// Minimum weight of a nonzero terminated codeword carrying `data_len` bits.
///
/// Error events starting at time zero are the least constrained, so it is
/// enough to minimize over data words whose first bit is 1.
pub fn frame_distance(code: &ConvCode, data_len: usize) -> Option<u32> {
    if data_len == 0 {
        return None;
    }
    let trellis = Trellis::new(code);
    let tail: Vec<u32> = (0..trellis.num_states)
        .map(|s| {
            let mut state = s;
            let mut w = 0;
            for _ in 0..code.memory {
                w += trellis.labels[state][0].count_ones();
                state = trellis.next[state][0];
            }
            w
        })
        .collect();
    let mut dist = vec![u32::MAX; trellis.num_states];
    dist[trellis.next[0][1]] = trellis.labels[0][1].count_ones();
    let mut best = u32::MAX;
    for step in 1..=data_len {
        for (s, &d) in dist.iter().enumerate() {
            if d != u32::MAX {
                best = best.min(d + tail[s]);
            }
        }
        if step == data_len {
            break;
        }
        let mut next = vec![u32::MAX; trellis.num_states];
        for (s, &d) in dist.iter().enumerate() {
            if d == u32::MAX || d >= best {
                continue;
            }
            for bit in 0..2 {
                let ns = trellis.next[s][bit];
                let nd = d + trellis.labels[s][bit].count_ones();
                if nd < next[ns] {
                    next[ns] = nd;
                }
            }
        }
        dist = next;
    }
    Some(best)
}

pub fn min_distance(code: &ConvCode, data_len: usize) -> Option<MinDistance> {
    let free = free_distance(code)?;
    let frame = frame_distance(code, data_len)?;
    Some(MinDistance {
        free,
        frame,
        frame_limited: frame > free,
    })
}
