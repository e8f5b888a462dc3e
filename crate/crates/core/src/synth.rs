//! Seeded generators for synthetic libraries, confusion networks, noisy
//! corpora and series/parallel lattice blueprints.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bestpath::{Segment, SegmentKind};
use crate::fst::{Fst, Transition};
use crate::index::{IntentLibrary, Token};
use crate::lattice_io::Wcn;
use crate::symbols::EPSILON_TOKEN;
use crate::weight::Weight;

/// Size limits for [`random_library`].
#[derive(Debug, Clone, Copy)]
pub struct LibraryParams {
    pub vocabulary: usize,
    pub max_examples: usize,
    pub max_tokens: usize,
    pub max_quota: usize,
    pub max_entities: usize,
    pub max_phrases: usize,
    pub max_phrase_len: usize,
}

impl Default for LibraryParams {
    fn default() -> Self {
        LibraryParams {
            vocabulary: 6,
            max_examples: 20,
            max_tokens: 5,
            max_quota: 2,
            max_entities: 2,
            max_phrases: 5,
            max_phrase_len: 2,
        }
    }
}

pub fn vocabulary_word(i: usize) -> String {
    format!("w{i}")
}

/// Small random library over a tiny vocabulary, so that matches, overlaps
/// and fuzzy placements are frequent.
pub fn random_library<R: Rng>(rng: &mut R, p: &LibraryParams) -> IntentLibrary {
    let mut lib = IntentLibrary::new();
    let n_entities = rng.gen_range(0..=p.max_entities);
    let mut entity_names = Vec::new();
    for e in 0..n_entities {
        let name = format!("__E{e}__");
        let n = rng.gen_range(1..=p.max_phrases);
        let phrases: Vec<String> = (0..n)
            .map(|_| {
                let len = rng.gen_range(1..=p.max_phrase_len);
                (0..len)
                    .map(|_| vocabulary_word(rng.gen_range(0..p.vocabulary)))
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        lib.add_entity(&name, &phrases);
        entity_names.push(name);
    }
    let n_examples = rng.gen_range(1..=p.max_examples);
    let n_intents = rng.gen_range(1..=n_examples.min(5));
    for k in 0..n_examples {
        let len = rng.gen_range(1..=p.max_tokens);
        let tokens: Vec<String> = (0..len)
            .map(|_| {
                if !entity_names.is_empty() && rng.gen_bool(0.2) {
                    entity_names.choose(rng).unwrap().clone()
                } else {
                    vocabulary_word(rng.gen_range(0..p.vocabulary))
                }
            })
            .collect();
        let quota = rng.gen_range(0..=p.max_quota);
        let intent = format!("i{}", k % n_intents);
        lib.add_example(&intent, &tokens.join(" "), quota);
    }
    lib
}

/// Random posteriors for `n` alternatives summing to one.
pub fn random_posteriors<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    raw.iter().map(|x| x / sum).collect()
}

/// Random confusion network with at most `max_slots` slots of at most
/// `max_alts` alternatives over the first `vocabulary` words; ε appears
/// with probability `eps` per slot.
pub fn random_wcn<R: Rng>(rng: &mut R, vocabulary: usize, max_slots: usize, max_alts: usize, eps: f64) -> Wcn {
    loop {
        let n_slots = rng.gen_range(1..=max_slots);
        let mut slots = Vec::with_capacity(n_slots);
        for _ in 0..n_slots {
            let n = rng.gen_range(1..=max_alts);
            let mut tokens: Vec<String> = Vec::new();
            if n > 1 && rng.gen_bool(eps) {
                tokens.push(EPSILON_TOKEN.to_string());
            }
            while tokens.len() < n {
                let w = vocabulary_word(rng.gen_range(0..vocabulary));
                if !tokens.contains(&w) {
                    tokens.push(w);
                }
                if tokens.len() >= vocabulary {
                    break;
                }
            }
            tokens.shuffle(rng);
            let post = random_posteriors(rng, tokens.len());
            slots.push(tokens.into_iter().zip(post).collect());
        }
        if let Ok(wcn) = Wcn::new(slots) {
            return wcn;
        }
    }
}

/// Realistic library: every intent gets distinct content words, so each
/// example is unambiguous within the library.
pub fn realistic_library<R: Rng>(rng: &mut R, intents: usize) -> IntentLibrary {
    let mut lib = IntentLibrary::new();
    lib.add_entity("__NUMBER__", &["one", "two", "three", "twenty one", "forty five"]);
    lib.add_entity("__TIME__", &["seven p m", "noon", "tomorrow at seven"]);
    for i in 0..intents {
        let id = format!("intent{i:03}");
        lib.add_intent(&id, &format!("Intent {i}"));
        let n_examples = rng.gen_range(1..=3);
        for k in 0..n_examples {
            let len = rng.gen_range(2..=5);
            let mut tokens: Vec<String> = (0..len).map(|j| format!("t{i}x{k}y{j}")).collect();
            if rng.gen_bool(0.15) {
                let slot = rng.gen_range(0..=len);
                let entity = if rng.gen_bool(0.5) { "__NUMBER__" } else { "__TIME__" };
                tokens.insert(slot, entity.to_string());
            }
            lib.add_example(&id, &tokens.join(" "), rng.gen_range(0..=2));
        }
    }
    lib
}

/// Every surface form of an example: placeholders replaced by each phrase
/// of their entity.
pub fn expansions(library: &IntentLibrary, tokens: &[Token]) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = vec![Vec::new()];
    for tok in tokens {
        match tok {
            Token::Word(w) => out.iter_mut().for_each(|v| v.push(w.clone())),
            Token::Entity(name) => {
                let phrases = &library.entities[name];
                out = out
                    .iter()
                    .flat_map(|prefix| {
                        phrases.iter().map(move |p| {
                            let mut v = prefix.clone();
                            v.extend(p.iter().cloned());
                            v
                        })
                    })
                    .collect();
            }
        }
    }
    out
}

/// One utterance of a noisy corpus: the spoken words, the confusion
/// network an ASR system might produce for them, and the example spoken.
#[derive(Debug, Clone)]
pub struct NoisyUtterance {
    pub truth: Vec<String>,
    pub wcn: Wcn,
    pub example_id: String,
}

const FILLERS: &[&str] = &["okay", "so", "well", "um", "yes", "right", "and", "the", "then"];

/// Confusable variant of a word: same stem, different ending.
pub fn confusable(word: &str, k: usize) -> String {
    format!("{word}~{k}")
}

/// An intent-bearing sentence (filler, example surface form, filler) and a
/// confusion network where a `noise` share of slots gets confusable
/// alternatives; in a perturbed slot the spoken word keeps posterior
/// ≥ 0.2 but is never the most probable one.
pub fn noisy_utterance<R: Rng>(rng: &mut R, library: &IntentLibrary, noise: (f64, f64)) -> NoisyUtterance {
    let examples: Vec<_> = library.examples().collect();
    let ex = examples.choose(rng).expect("library has examples");
    let forms = expansions(library, &ex.tokens);
    let form = forms.choose(rng).unwrap().clone();
    let mut truth: Vec<String> = Vec::new();
    for _ in 0..rng.gen_range(0..=3) {
        truth.push(FILLERS.choose(rng).unwrap().to_string());
    }
    truth.extend(form);
    for _ in 0..rng.gen_range(0..=3) {
        truth.push(FILLERS.choose(rng).unwrap().to_string());
    }

    let share = rng.gen_range(noise.0..=noise.1);
    let n_noisy = ((truth.len() as f64) * share).round().max(1.0) as usize;
    let mut order: Vec<usize> = (0..truth.len()).collect();
    order.shuffle(rng);
    let noisy: Vec<usize> = order.into_iter().take(n_noisy).collect();

    let slots = truth
        .iter()
        .enumerate()
        .map(|(i, w)| {
            if !noisy.contains(&i) {
                return vec![(w.clone(), 1.0)];
            }
            let correct = rng.gen_range(0.2..0.3);
            let rest = 1.0 - correct;
            if rng.gen_bool(0.5) {
                vec![(confusable(w, 0), rest), (w.clone(), correct)]
            } else {
                let top = rest * rng.gen_range(0.55..0.9);
                vec![
                    (confusable(w, 0), top),
                    (w.clone(), correct),
                    (confusable(w, 1), rest - top),
                ]
            }
        })
        .collect();
    NoisyUtterance {
        truth,
        wcn: Wcn::new(slots).expect("posteriors sum to one"),
        example_id: ex.example_id.clone(),
    }
}

/// Part of a series/parallel blueprint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Part {
    /// A chain of the given number of arcs.
    Series(usize),
    /// Alternative branches from one state to a merge state, each given as
    /// its number of arcs.
    Parallel(Vec<usize>),
}

/// Random blueprint with `parts` parts and the lattice it describes, plus
/// the segmentation the lattice must produce.
pub fn blueprint<R: Rng>(rng: &mut R, parts: usize) -> (Vec<Part>, Fst, Vec<Segment>) {
    let mut plan = Vec::with_capacity(parts);
    for _ in 0..parts {
        let after_parallel = matches!(plan.last(), Some(Part::Parallel(_)));
        if after_parallel || rng.gen_bool(0.5) {
            plan.push(Part::Series(rng.gen_range(1..=3)));
        } else {
            let n = rng.gen_range(2..=3);
            plan.push(Part::Parallel((0..n).map(|_| rng.gen_range(1..=3)).collect()));
        }
    }
    let (fst, segments) = build_blueprint(&plan);
    (plan, fst, segments)
}

/// Lattice for a blueprint and its expected segmentation. Labels are
/// distinct word ids starting at 2. Two parallel parts must be separated
/// by a series part.
pub fn build_blueprint(plan: &[Part]) -> (Fst, Vec<Segment>) {
    let mut fst = Fst::new();
    let mut cur = fst.add_state();
    fst.set_start(cur);
    let mut label = 2;
    let mut next_label = || {
        label += 1;
        Transition::acceptor(label - 1, Weight::new(0.5), 0)
    };
    let mut parallel: Vec<(usize, usize)> = Vec::new();
    for part in plan {
        match part {
            Part::Series(k) => {
                for _ in 0..*k {
                    let next = fst.add_state();
                    fst.add_arc(cur, Transition { next, ..next_label() });
                    cur = next;
                }
            }
            Part::Parallel(branches) => {
                let mut ends = Vec::new();
                for &len in branches {
                    let mut s = cur;
                    for _ in 1..len {
                        let next = fst.add_state();
                        fst.add_arc(s, Transition { next, ..next_label() });
                        s = next;
                    }
                    ends.push(s);
                }
                let merge = fst.add_state();
                for s in ends {
                    fst.add_arc(s, Transition { next: merge, ..next_label() });
                }
                parallel.push((cur, merge));
                cur = merge;
            }
        }
    }
    fst.set_final(cur, Weight::ONE);

    let mut in_parallel = vec![None; fst.num_states()];
    for (k, &(a, b)) in parallel.iter().enumerate() {
        in_parallel[a..=b].fill(Some(k));
    }
    let mut segments: Vec<Segment> = Vec::new();
    for s in fst.state_ids() {
        match in_parallel[s] {
            Some(k) => {
                let (first, last) = parallel[k];
                if s == first {
                    segments.push(Segment {
                        kind: SegmentKind::Parallel,
                        first,
                        last,
                    });
                }
            }
            None => match segments.last_mut() {
                Some(seg) if seg.kind == SegmentKind::Series && seg.last + 1 == s => seg.last = s,
                _ => segments.push(Segment {
                    kind: SegmentKind::Series,
                    first: s,
                    last: s,
                }),
            },
        }
    }
    (fst, segments)
}
