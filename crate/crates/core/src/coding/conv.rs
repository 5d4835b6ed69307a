//! Feed-forward rate-1/n convolutional codes with trellis termination.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A feed-forward convolutional code given by its generator polynomials.
///
/// Polynomials are bit masks with bit `i` holding the coefficient of `Dⁱ`,
/// so `1 + D²` is `0b101`. The octal spelling used for configuration follows
/// the same convention: `"45"` is `0b100101 = 1 + D² + D⁵`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvCode {
    pub name: String,
    pub generators: Vec<u32>,
    pub memory: usize,
}

impl ConvCode {
    pub fn new(name: impl Into<String>, generators: Vec<u32>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::config(
                "code.generators",
                "at least one generator is required",
            ));
        }
        if generators.contains(&0) {
            return Err(Error::config(
                "code.generators",
                "generator polynomials must be nonzero",
            ));
        }
        let memory = generators
            .iter()
            .map(|g| 31 - g.leading_zeros() as usize)
            .max()
            .unwrap();
        if memory > 16 {
            return Err(Error::config(
                "code.generators",
                "memory above 16 is not supported",
            ));
        }
        Ok(Self {
            name: name.into(),
            generators,
            memory,
        })
    }

    /// Parses octal generator strings, e.g. `["5", "7"]`.
    pub fn from_octal(name: impl Into<String>, octal: &[&str]) -> Result<Self> {
        let generators = octal
            .iter()
            .map(|s| {
                u32::from_str_radix(s.trim(), 8).map_err(|_| {
                    Error::config("code.generators", format!("`{s}` is not an octal polynomial"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(name, generators)
    }

    /// Code A: `[1 + D, D]`, memory 1.
    pub fn code_a() -> Self {
        Self::new("A", vec![0b11, 0b10]).unwrap()
    }

    /// Code B: `[1 + D², 1 + D + D²]`, memory 2.
    pub fn code_b() -> Self {
        Self::new("B", vec![0b101, 0b111]).unwrap()
    }

    /// Code C: `[1 + D² + D⁵, 1 + D + D² + D³ + D⁴ + D⁵]`, memory 5.
    pub fn code_c() -> Self {
        Self::new("C", vec![0b10_0101, 0b11_1111]).unwrap()
    }

    /// Code D: `[1 + D + D² + D⁵ + D⁶, 1 + D² + D³ + D⁴ + D⁶]`, memory 6.
    pub fn code_d() -> Self {
        Self::new("D", vec![0b110_0111, 0b101_1101]).unwrap()
    }

    /// Looks up one of the four reference codes by letter.
    pub fn by_name(name: &str) -> Option<Self> {
        match name.trim().to_ascii_uppercase().as_str() {
            "A" => Some(Self::code_a()),
            "B" => Some(Self::code_b()),
            "C" => Some(Self::code_c()),
            "D" => Some(Self::code_d()),
            _ => None,
        }
    }

    /// Outputs per input bit (the inverse rate).
    pub fn outputs(&self) -> usize {
        self.generators.len()
    }

    pub fn rate(&self) -> f64 {
        1.0 / self.outputs() as f64
    }

    pub fn num_states(&self) -> usize {
        1 << self.memory
    }

    /// Encoded length of a terminated frame carrying `data_len` bits.
    pub fn encoded_len(&self, data_len: usize) -> usize {
        self.outputs() * (data_len + self.memory)
    }

    /// Octal spelling of the generators.
    pub fn octal(&self) -> Vec<String> {
        self.generators.iter().map(|g| format!("{g:o}")).collect()
    }

    /// Next state and the packed output bits (bit `j` = generator `j`) for
    /// input `bit` from `state`. The state holds the previous `memory` inputs,
    /// most recent in bit 0.
    #[inline]
    pub fn step(&self, state: usize, bit: u8) -> (usize, u32) {
        let register = ((state as u32) << 1) | u32::from(bit & 1);
        let mut out = 0u32;
        for (j, g) in self.generators.iter().enumerate() {
            out |= ((register & g).count_ones() & 1) << j;
        }
        let mask = (1u32 << self.memory) - 1;
        ((register & mask) as usize, out)
    }

    /// Encodes `data` and appends `memory` zero tail bits so the encoder ends
    /// in state zero. Output bits are serialized per time step, generator 0
    /// first.
    pub fn encode(&self, data: &[u8]) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len(data.len()));
        let mut state = 0usize;
        for &bit in data.iter().chain(std::iter::repeat_n(&0, self.memory)) {
            let (next, bits) = self.step(state, bit);
            for j in 0..self.outputs() {
                out.push(((bits >> j) & 1) as u8);
            }
            state = next;
        }
        debug_assert_eq!(state, 0);
        out
    }
}

/// Precomputed state transitions shared by the decoder and distance search.
#[derive(Clone, Debug)]
pub struct Trellis {
    pub outputs: usize,
    pub num_states: usize,
    /// `next[state][bit]`
    pub next: Vec<[usize; 2]>,
    /// `labels[state][bit]`, packed output bits.
    pub labels: Vec<[u32; 2]>,
}

impl Trellis {
    pub fn new(code: &ConvCode) -> Self {
        let num_states = code.num_states();
        let mut next = Vec::with_capacity(num_states);
        let mut labels = Vec::with_capacity(num_states);
        for s in 0..num_states {
            let (n0, o0) = code.step(s, 0);
            let (n1, o1) = code.step(s, 1);
            next.push([n0, n1]);
            labels.push([o0, o1]);
        }
        Self {
            outputs: code.outputs(),
            num_states,
            next,
            labels,
        }
    }
}
