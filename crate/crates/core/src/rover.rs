//! System combination by word transition network voting.

use alloc::string::String;
use alloc::vec::Vec;

/// Slots of aligned words; each slot holds one entry per system, `None`
/// being the null word.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WordTransitionNetwork {
    slots: Vec<Vec<Option<String>>>,
    systems: usize,
}

const NULL_COST: usize = 1;
const SUB_COST: usize = 1;

#[derive(Clone, Copy)]
enum Step {
    Match,
    Skip,
    Insert,
}

impl WordTransitionNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn systems(&self) -> usize {
        self.systems
    }

    pub fn slots(&self) -> &[Vec<Option<String>>] {
        &self.slots
    }

    fn slot_has(slot: &[Option<String>], w: Option<&str>) -> bool {
        slot.iter().any(|x| x.as_deref() == w)
    }

    /// Aligns `hyp` against the network by minimum edit distance and adds it
    /// as a new system.
    pub fn add<S: AsRef<str>>(&mut self, hyp: &[S]) {
        if self.systems == 0 {
            self.slots = hyp.iter().map(|w| alloc::vec![Some(w.as_ref().into())]).collect();
            self.systems = 1;
            return;
        }
        let (n, m) = (self.slots.len(), hyp.len());
        let w = m + 1;
        let match_cost = |i: usize, j: usize| {
            if Self::slot_has(&self.slots[i], Some(hyp[j].as_ref())) { 0 } else { SUB_COST }
        };
        let skip_cost = |i: usize| if Self::slot_has(&self.slots[i], None) { 0 } else { NULL_COST };
        let mut d = alloc::vec![0usize; (n + 1) * w];
        for i in 1..=n {
            d[i * w] = d[(i - 1) * w] + skip_cost(i - 1);
        }
        for j in 1..=m {
            d[j] = j * NULL_COST;
        }
        for i in 1..=n {
            for j in 1..=m {
                let a = d[(i - 1) * w + j - 1] + match_cost(i - 1, j - 1);
                let b = d[(i - 1) * w + j] + skip_cost(i - 1);
                let c = d[i * w + j - 1] + NULL_COST;
                d[i * w + j] = a.min(b).min(c);
            }
        }
        let mut steps = Vec::new();
        let (mut i, mut j) = (n, m);
        while i > 0 || j > 0 {
            let here = d[i * w + j];
            if i > 0 && j > 0 && d[(i - 1) * w + j - 1] + match_cost(i - 1, j - 1) == here {
                steps.push(Step::Match);
                i -= 1;
                j -= 1;
            } else if i > 0 && d[(i - 1) * w + j] + skip_cost(i - 1) == here {
                steps.push(Step::Skip);
                i -= 1;
            } else {
                steps.push(Step::Insert);
                j -= 1;
            }
        }
        steps.reverse();
        let prior = self.systems;
        let mut old = core::mem::take(&mut self.slots).into_iter();
        let mut words = hyp.iter();
        for step in steps {
            match step {
                Step::Match => {
                    let mut slot = old.next().expect("slot");
                    slot.push(Some(words.next().expect("word").as_ref().into()));
                    self.slots.push(slot);
                }
                Step::Skip => {
                    let mut slot = old.next().expect("slot");
                    slot.push(None);
                    self.slots.push(slot);
                }
                Step::Insert => {
                    let mut slot = alloc::vec![None; prior];
                    slot.push(Some(words.next().expect("word").as_ref().into()));
                    self.slots.push(slot);
                }
            }
        }
        self.systems += 1;
    }

    /// Plurality word per slot; ties go to the earliest system's word and a
    /// winning null emits nothing.
    pub fn vote(&self) -> Vec<String> {
        let mut out = Vec::new();
        for slot in &self.slots {
            let mut best: Option<(&Option<String>, usize)> = None;
            for cand in slot {
                let votes = slot.iter().filter(|x| *x == cand).count();
                if best.is_none_or(|(_, v)| votes > v) {
                    best = Some((cand, votes));
                }
            }
            if let Some((Some(w), _)) = best {
                out.push(w.clone());
            }
        }
        out
    }
}

/// Combines one hypothesis per system, aligned in input order.
pub fn rover_combine<S: AsRef<str>>(hyps: &[Vec<S>]) -> Vec<String> {
    let mut wtn = WordTransitionNetwork::new();
    for h in hyps {
        wtn.add(h);
    }
    wtn.vote()
}
