//! Suffix automaton over the binary alphabet.

/// Sentinel for a missing transition or suffix link.
const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct State {
    len: u32,
    link: u32,
    next: [u32; 2],
}

/// Minimal automaton recognizing every factor of one binary word.
#[derive(Debug, Clone)]
pub struct SuffixAutomaton {
    states: Vec<State>,
    word_len: usize,
}

impl SuffixAutomaton {
    pub fn new(word: &[u8]) -> Self {
        let mut states = Vec::with_capacity(2 * word.len() + 2);
        states.push(State { len: 0, link: NONE, next: [NONE; 2] });
        let mut last = 0u32;
        for &c in word {
            let c = c as usize;
            let cur = states.len() as u32;
            states.push(State { len: states[last as usize].len + 1, link: NONE, next: [NONE; 2] });
            let mut p = last;
            while p != NONE && states[p as usize].next[c] == NONE {
                states[p as usize].next[c] = cur;
                p = states[p as usize].link;
            }
            if p == NONE {
                states[cur as usize].link = 0;
            } else {
                let q = states[p as usize].next[c];
                if states[p as usize].len + 1 == states[q as usize].len {
                    states[cur as usize].link = q;
                } else {
                    let clone = states.len() as u32;
                    let mut cloned = states[q as usize];
                    cloned.len = states[p as usize].len + 1;
                    states.push(cloned);
                    while p != NONE && states[p as usize].next[c] == q {
                        states[p as usize].next[c] = clone;
                        p = states[p as usize].link;
                    }
                    states[q as usize].link = clone;
                    states[cur as usize].link = clone;
                }
            }
            last = cur;
        }
        SuffixAutomaton { states, word_len: word.len() }
    }

    pub fn root(&self) -> u32 {
        0
    }

    pub fn word_len(&self) -> usize {
        self.word_len
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    /// Transition on `symbol`, if the extended word is still a factor.
    pub fn step(&self, state: u32, symbol: u8) -> Option<u32> {
        let next = self.states[state as usize].next[symbol as usize];
        (next != NONE).then_some(next)
    }

    pub fn contains(&self, word: &[u8]) -> bool {
        word.iter().try_fold(self.root(), |s, &c| self.step(s, c)).is_some()
    }

    /// Number of distinct factors of length `n`.
    pub fn count_factors(&self, n: usize) -> usize {
        if n == 0 {
            return 1;
        }
        self.states
            .iter()
            .skip(1)
            .filter(|s| {
                let link_len = self.states[s.link as usize].len as usize;
                link_len < n && n <= s.len as usize
            })
            .count()
    }
}
