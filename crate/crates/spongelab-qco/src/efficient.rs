//! The sorted padded-list representation of the compressed oracle and
//! the query operator on it.
//!
//! A database with at most t entries is stored as t slots of
//! (input, output) pairs, sorted by input, padded at the end with
//! (infinity, bot) fillers; the invariant is output = bot iff
//! input = infinity, with no duplicate non-infinity inputs. The
//! compression circuit bubbles the queried input's slot to the end,
//! relabels between infinity and the queried input, applies the
//! single-register compression on that slot's output field, and bubbles
//! back. A query is compress, answer, recompress (without appending a
//! second slot).

use num_complex::Complex64;

use crate::db::{AmpVector, Dims};
use crate::ops::c_small;

type C64 = Complex64;

/// Amplitudes over X x Y x (slot list); slot j (1-based, first = least
/// significant digit) holds input in [M] u {infinity} and output in
/// [N] u {bot}.
#[derive(Debug, Clone)]
pub struct CompactState {
    pub dims: Dims,
    pub slots: usize,
    pub data: Vec<C64>,
}

fn slot_dim(dims: Dims) -> usize {
    (dims.m() + 1) * (dims.n() + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Slot {
    input: usize,  // M = infinity
    output: usize, // N = bot
}

impl CompactState {
    pub fn initial(dims: Dims) -> Self {
        let mut data = vec![C64::new(0.0, 0.0); dims.m() * dims.n()];
        data[0] = C64::new(1.0, 0.0);
        CompactState {
            dims,
            slots: 0,
            data,
        }
    }

    fn list_dim(&self) -> usize {
        slot_dim(self.dims).pow(self.slots as u32)
    }

    fn decode(&self, idx: usize) -> (usize, usize, Vec<Slot>) {
        let dims = self.dims;
        let sd = slot_dim(dims);
        let mut rest = idx;
        let mut slots = Vec::with_capacity(self.slots);
        for _ in 0..self.slots {
            let v = rest % sd;
            rest /= sd;
            slots.push(Slot {
                input: v / (dims.n() + 1),
                output: v % (dims.n() + 1),
            });
        }
        let y = rest % dims.n();
        let x = rest / dims.n();
        (x, y, slots)
    }

    fn encode(&self, x: usize, y: usize, slots: &[Slot]) -> usize {
        let dims = self.dims;
        let sd = slot_dim(dims);
        let mut idx = x * dims.n() + y;
        for s in slots.iter().rev() {
            idx = idx * sd + s.input * (dims.n() + 1) + s.output;
        }
        idx
    }

    /// Append an (infinity, bot) slot at the end of the list.
    pub fn append_slot(&self) -> CompactState {
        let dims = self.dims;
        let sd = slot_dim(dims);
        let filler = dims.m() * (dims.n() + 1) + dims.n();
        let old_list = self.list_dim();
        let mut out = CompactState {
            dims,
            slots: self.slots + 1,
            data: vec![C64::new(0.0, 0.0); self.data.len() * sd],
        };
        for (idx, &z) in self.data.iter().enumerate() {
            if z.norm_sqr() == 0.0 {
                continue;
            }
            let list = idx % old_list;
            let xy = idx / old_list;
            out.data[(xy * sd + filler) * old_list + list] = z;
        }
        out
    }

    /// Apply a basis permutation given by a slot-list rewrite.
    fn permute(&self, f: impl Fn(usize, &mut Vec<Slot>)) -> CompactState {
        let mut out = self.clone();
        for z in out.data.iter_mut() {
            *z = C64::new(0.0, 0.0);
        }
        for (idx, &z) in self.data.iter().enumerate() {
            if z.norm_sqr() == 0.0 {
                continue;
            }
            let (x, y, mut slots) = self.decode(idx);
            f(x, &mut slots);
            let target = self.encode(x, y, &slots);
            debug_assert!(
                out.data[target].norm_sqr() == 0.0,
                "slot rewrite merged two basis states"
            );
            out.data[target] = z;
        }
        out
    }

    /// One conditional-swap pass at positions (j, j+1), 1-based.
    /// Forward passes move the queried input right; backward passes are
    /// the inverse.
    fn bubble_pass(&self, j: usize, forward: bool) -> CompactState {
        self.permute(|x, slots| {
            let a = slots[j - 1];
            let b = slots[j];
            let cond = if forward {
                a.input == x && b.input > x
            } else {
                b.input == x && a.input > x
            };
            if cond {
                slots.swap(j - 1, j);
            }
        })
    }

    fn bubble_right(&self, t: usize) -> CompactState {
        let mut st = self.clone();
        for j in 1..=t {
            st = st.bubble_pass(j, true);
        }
        st
    }

    fn bubble_left(&self, t: usize) -> CompactState {
        let mut st = self.clone();
        for j in (1..=t).rev() {
            st = st.bubble_pass(j, false);
        }
        st
    }

    /// Exchange the queried input with the infinity marker in the last
    /// slot when its output is bot.
    fn relabel_last(&self) -> CompactState {
        let dims = self.dims;
        let last = self.slots - 1;
        self.permute(|x, slots| {
            if slots[last].output == dims.bot() {
                if slots[last].input == dims.m() {
                    slots[last].input = x;
                } else if slots[last].input == x {
                    slots[last].input = dims.m();
                }
            }
        })
    }

    /// Apply the single-register compression on the output field of the
    /// last slot.
    fn compress_last_output(&self) -> CompactState {
        let dims = self.dims;
        let c = c_small(dims);
        let radix = dims.n() + 1;
        let last_base = slot_dim(dims).pow((self.slots - 1) as u32);
        let mut out = self.clone();
        let mut scratch = vec![C64::new(0.0, 0.0); radix];
        // Iterate over everything except the last slot's output digit.
        let outer = self.data.len() / radix;
        for o in 0..outer {
            // o combines xy, lower slots and the last slot's input field:
            // last slot value = input * radix + output, so output is the
            // least significant factor of the last digit.
            let low = o % last_base;
            let rest = o / last_base; // xy * (m+1) + last_input
            let base_idx = |v: usize| (rest * radix + v) * last_base + low;
            for v in 0..radix {
                scratch[v] = self.data[base_idx(v)];
            }
            let new = c.apply(&scratch);
            for v in 0..radix {
                out.data[base_idx(v)] = new[v];
            }
        }
        out
    }

    /// Re-run the compression circuit without appending a slot: bubble
    /// the queried entry to the end, relabel, compress, relabel, bubble
    /// back.
    pub fn recompress(&self) -> CompactState {
        assert!(self.slots >= 1, "nothing to compress");
        let t = self.slots - 1;
        self.bubble_right(t)
            .relabel_last()
            .compress_last_output()
            .relabel_last()
            .bubble_left(t)
    }

    /// The full compression operator: append a filler slot, then
    /// recompress. Self-inverse up to the extra filler slot.
    pub fn compress_op(&self) -> CompactState {
        self.append_slot().recompress()
    }

    /// Answer the query: add the recorded output for the queried input
    /// into Y (mod N). At most one slot matches; a missing or undefined
    /// entry answers nothing.
    fn answer(&self) -> CompactState {
        let dims = self.dims;
        let mut out = self.clone();
        for z in out.data.iter_mut() {
            *z = C64::new(0.0, 0.0);
        }
        for (idx, &z) in self.data.iter().enumerate() {
            if z.norm_sqr() == 0.0 {
                continue;
            }
            let (x, y, slots) = self.decode(idx);
            let mut y2 = y;
            for s in &slots {
                if s.input == x && s.output != dims.bot() {
                    y2 = (y + s.output) % dims.n();
                    break;
                }
            }
            let target = self.encode(x, y2, &slots);
            debug_assert!(out.data[target].norm_sqr() == 0.0);
            out.data[target] = z;
        }
        out
    }

    /// The full query operator on the compact representation:
    /// decompress on the queried input, answer, recompress. Grows the
    /// list by one slot.
    pub fn query_op(&self) -> CompactState {
        self.compress_op().answer().recompress()
    }

    /// Check the representation invariants on the support: slots sorted
    /// by input with no duplicate non-filler inputs, and output = bot
    /// exactly on filler slots.
    pub fn validate(&self) -> crate::Result<()> {
        let dims = self.dims;
        for (idx, z) in self.data.iter().enumerate() {
            if z.norm_sqr() == 0.0 {
                continue;
            }
            let (_, _, slots) = self.decode(idx);
            for (j, s) in slots.iter().enumerate() {
                if (s.output == dims.bot()) != (s.input == dims.m()) {
                    return Err(crate::Error::Contract(format!(
                        "slot {j} mixes filler markers: input {} output {}",
                        s.input, s.output
                    )));
                }
                if j + 1 < slots.len() {
                    let next = slots[j + 1];
                    if s.input > next.input
                        || (s.input == next.input && s.input != dims.m())
                    {
                        return Err(crate::Error::Contract(format!(
                            "slots {j} and {} out of order",
                            j + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Apply a unitary on X x Y (identity on the slot list).
    pub fn apply_unitary_xy(&self, u: &crate::matrix::CMat) -> CompactState {
        let dims = self.dims;
        let block = dims.m() * dims.n();
        assert_eq!(u.rows(), block);
        let list = self.list_dim();
        let mut out = self.clone();
        let mut col = vec![C64::new(0.0, 0.0); block];
        for l in 0..list {
            for (b, c) in col.iter_mut().enumerate() {
                *c = self.data[b * list + l];
            }
            let new = u.apply(&col);
            for (b, v) in new.iter().enumerate() {
                out.data[b * list + l] = *v;
            }
        }
        out
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Embed a dense joint state into the compact representation with the
/// given slot count: each database becomes its sorted pair list plus
/// fillers.
pub fn embed(dense: &AmpVector, slots: usize) -> CompactState {
    assert_eq!(dense.anc, 1, "embedding is defined for plain X,Y,F states");
    let dims = dense.dims;
    let mut out = CompactState {
        dims,
        slots,
        data: vec![C64::new(0.0, 0.0); dims.m() * dims.n() * slot_dim(dims).pow(slots as u32)],
    };
    for (idx, &z) in dense.data.iter().enumerate() {
        if z.norm_sqr() == 0.0 {
            continue;
        }
        let (x, y, d) = dims.split_xyf(idx);
        let mut list: Vec<Slot> = (0..dims.m())
            .filter_map(|input| {
                let v = dims.digit(d, input);
                (v != dims.bot()).then_some(Slot { input, output: v })
            })
            .collect();
        assert!(list.len() <= slots, "database too large for slot budget");
        while list.len() < slots {
            list.push(Slot {
                input: dims.m(),
                output: dims.bot(),
            });
        }
        let target = out.encode(x, y, &list);
        out.data[target] += z;
    }
    out
}

/// Max-abs amplitude difference between a compact state and the
/// embedding of a dense state.
pub fn compact_vs_dense_defect(compact: &CompactState, dense: &AmpVector) -> f64 {
    let embedded = embed(dense, compact.slots);
    compact
        .data
        .iter()
        .zip(&embedded.data)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}
