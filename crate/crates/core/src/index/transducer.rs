use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::entity::{build_entity_grammar, EntityGrammar};
use super::library::{IntentExample, IntentLibrary, Token};
use crate::error::{Error, LibraryError};
use crate::fst::{Fst, StateId, Transition};
use crate::symbols::{Label, SymbolTable, EPSILON, SIGMA};
use crate::weight::Weight;

/// The index root: start and final state carrying the σ:ε loop.
pub const ROOT: StateId = 0;

/// Role of an annotation output symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymbolKind {
    /// First matched word of an example.
    Begin,
    /// Later matched example word.
    Continue,
    /// Closes the match; emitted on an ε-input arc.
    End,
    /// Word inside the entity filling token `position`.
    Entity { position: usize },
    /// Unexpanded entity placeholder at token `position`.
    Placeholder { position: usize },
}

/// What an output symbol means: its kind and the example (index into
/// [`IndexTransducer::examples`]) it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolInfo {
    pub example: usize,
    pub kind: SymbolKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexStats {
    pub states: usize,
    pub arcs: usize,
    pub examples: usize,
    /// Distinct intents with at least one branch.
    pub branch_families: usize,
}

/// The compiled intent index.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexTransducer {
    pub fst: Fst,
    pub symbols: SymbolTable,
    /// Examples in library order; branch `e` belongs to `examples[e]`.
    pub examples: Vec<IntentExample>,
    pub info: BTreeMap<Label, SymbolInfo>,
    pub library: IntentLibrary,
}

impl IndexTransducer {
    pub fn symbol_info(&self, label: Label) -> Option<SymbolInfo> {
        self.info.get(&label).copied()
    }

    pub fn example(&self, e: usize) -> &IntentExample {
        &self.examples[e]
    }

    pub fn quota(&self, e: usize) -> usize {
        self.examples[e].blank_quota
    }

    /// Entity name behind token `position` of example `e`.
    pub fn entity_name(&self, e: usize, position: usize) -> &str {
        self.examples[e].tokens[position].as_str()
    }

    pub fn has_placeholders(&self) -> bool {
        self.fst.state_ids().any(|s| {
            self.fst.arcs(s).iter().any(|t| {
                matches!(
                    self.symbol_info(t.olabel),
                    Some(SymbolInfo {
                        kind: SymbolKind::Placeholder { .. },
                        ..
                    })
                )
            })
        })
    }

    pub fn stats(&self) -> IndexStats {
        let mut intents: Vec<&str> = self.examples.iter().map(|e| e.intent_id.as_str()).collect();
        intents.sort_unstable();
        intents.dedup();
        IndexStats {
            states: self.fst.num_states(),
            arcs: self.fst.num_arcs(),
            examples: self.examples.len(),
            branch_families: intents.len(),
        }
    }

    /// Deterministic JSON form holding the transducer, its symbols, the
    /// annotation map and the source library.
    pub fn to_artifact(&self) -> String {
        let artifact = Artifact {
            format: ARTIFACT_FORMAT.to_string(),
            library: serde_json::from_str(&self.library.to_json()).expect("library json"),
            symbols: self.symbols.clone(),
            annotations: self.info.iter().map(|(&l, &i)| (l, i)).collect(),
            fst: self.fst.clone(),
        };
        serde_json::to_string(&artifact).expect("index serializes")
    }

    pub fn from_artifact(text: &str) -> Result<Self, Error> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let artifact: Artifact = serde_path_to_error::deserialize(de).map_err(|e| {
            LibraryError::Schema {
                pointer: e.path().to_string(),
                message: e.inner().to_string(),
            }
        })?;
        if artifact.format != ARTIFACT_FORMAT {
            return Err(LibraryError::Schema {
                pointer: "/format".into(),
                message: format!("unsupported index format `{}`", artifact.format),
            }
            .into());
        }
        let library = IntentLibrary::from_json(&artifact.library.to_string()).or_else(|e| {
            // an empty library is a legal index
            match e {
                LibraryError::NoIntents => Ok(IntentLibrary::default()),
                other => Err(other),
            }
        })?;
        artifact.fst.validate()?;
        crate::compose::check_labels(&artifact.fst, &artifact.symbols)?;
        let examples: Vec<IntentExample> = library.examples().cloned().collect();
        let info: BTreeMap<Label, SymbolInfo> = artifact.annotations.into_iter().collect();
        if let Some((_, bad)) = info.iter().find(|(_, i)| i.example >= examples.len()) {
            return Err(LibraryError::Schema {
                pointer: "/annotations".into(),
                message: format!("annotation refers to missing example {}", bad.example),
            }
            .into());
        }
        Ok(IndexTransducer {
            fst: artifact.fst,
            symbols: artifact.symbols,
            examples,
            info,
            library,
        })
    }
}

const ARTIFACT_FORMAT: &str = "intent-index/1";

#[derive(Serialize, Deserialize)]
struct Artifact {
    format: String,
    library: serde_json::Value,
    symbols: SymbolTable,
    annotations: Vec<(Label, SymbolInfo)>,
    fst: Fst,
}

fn annotation_symbol(
    symbols: &mut SymbolTable,
    info: &mut BTreeMap<Label, SymbolInfo>,
    name: String,
    value: SymbolInfo,
) -> Result<Label, LibraryError> {
    if symbols.get(&name).is_some() {
        return Err(LibraryError::ReservedToken(name));
    }
    let label = symbols.intern(&name);
    info.insert(label, value);
    Ok(label)
}

/// Builds the index with one branch per example, entity placeholders left
/// as ω* arcs. Words are interned into `symbols`.
pub fn build_index(library: &IntentLibrary, mut symbols: SymbolTable) -> Result<IndexTransducer, LibraryError> {
    library.validate()?;
    let examples: Vec<IntentExample> = library.examples().cloned().collect();
    let mut info = BTreeMap::new();
    let mut fst = Fst::new();
    fst.add_state();
    fst.set_start(ROOT);
    fst.set_final(ROOT, Weight::ONE);
    fst.add_arc(ROOT, Transition::new(SIGMA, EPSILON, Weight::ONE, ROOT));

    for (e, ex) in examples.iter().enumerate() {
        let id = &ex.example_id;
        let mut sym = |symbols: &mut SymbolTable, name: String, kind| {
            annotation_symbol(symbols, &mut info, name, SymbolInfo { example: e, kind })
        };
        let begin = sym(&mut symbols, format!("<ib:{id}>"), SymbolKind::Begin)?;
        let cont = sym(&mut symbols, format!("<ic:{id}>"), SymbolKind::Continue)?;
        let end = sym(&mut symbols, format!("<ie:{id}>"), SymbolKind::End)?;
        let mut cur = ROOT;
        for (k, tok) in ex.tokens.iter().enumerate() {
            if k > 0 {
                fst.add_arc(cur, Transition::new(SIGMA, EPSILON, Weight::ONE, cur));
            }
            let next = fst.add_state();
            let (ilabel, olabel) = match tok {
                Token::Word(w) => (symbols.intern(w), if k == 0 { begin } else { cont }),
                Token::Entity(name) => {
                    let placeholder = sym(
                        &mut symbols,
                        format!("<w*:{id}:{k}>"),
                        SymbolKind::Placeholder { position: k },
                    )?;
                    (symbols.intern(name), placeholder)
                }
            };
            fst.add_arc(cur, Transition::new(ilabel, olabel, Weight::ONE, next));
            cur = next;
        }
        fst.add_arc(cur, Transition::new(EPSILON, end, Weight::ONE, ROOT));
    }
    Ok(IndexTransducer {
        fst,
        symbols,
        examples,
        info,
        library: library.clone(),
    })
}

/// Inlines a copy of the matching grammar in place of every ω* arc. The
/// grammar start merges into the arc's source state; grammar finals join
/// the arc's target with ε:ε arcs. Inlined words emit ω, except the first
/// word of an example opening with an entity, which emits ι_B.
pub fn replace_entities(
    index: &IndexTransducer,
    grammars: &BTreeMap<String, EntityGrammar>,
) -> Result<IndexTransducer, LibraryError> {
    let mut symbols = index.symbols.clone();
    let mut info = index.info.clone();
    let old = &index.fst;
    let mut fst = Fst::new();
    fst.add_states(old.num_states());
    if let Some(s) = old.start() {
        fst.set_start(s);
    }
    let begin_of = |info: &BTreeMap<Label, SymbolInfo>, e: usize| {
        info.iter()
            .find(|(_, i)| i.example == e && i.kind == SymbolKind::Begin)
            .map(|(&l, _)| l)
            .expect("every example has a begin symbol")
    };

    for s in old.state_ids() {
        if let Some(w) = old.final_weight(s) {
            fst.set_final(s, w);
        }
        for tr in old.arcs(s) {
            let placeholder = match index.symbol_info(tr.olabel) {
                Some(SymbolInfo {
                    example,
                    kind: SymbolKind::Placeholder { position },
                }) => Some((example, position)),
                _ => None,
            };
            let Some((e, position)) = placeholder else {
                fst.add_arc(s, *tr);
                continue;
            };
            let name = index.entity_name(e, position);
            let grammar = grammars
                .get(name)
                .ok_or_else(|| LibraryError::MissingGrammar(name.to_string()))?;
            if let Some(l) = grammar.fst.labels().find(|&l| !symbols.contains_label(l)) {
                return Err(LibraryError::MissingGrammar(format!(
                    "{name} (label {l} outside the index symbol table)"
                )));
            }
            let omega = annotation_symbol(
                &mut symbols,
                &mut info,
                format!("<w:{}:{position}>", index.examples[e].example_id),
                SymbolInfo {
                    example: e,
                    kind: SymbolKind::Entity { position },
                },
            )?;
            let first = if position == 0 { begin_of(&info, e) } else { omega };
            let g = &grammar.fst;
            let gstart = g.start().expect("grammar has a start");
            let mut map = vec![usize::MAX; g.num_states()];
            map[gstart] = s;
            for gs in g.state_ids() {
                if gs != gstart {
                    map[gs] = fst.add_state();
                }
            }
            for gs in g.state_ids() {
                for gt in g.arcs(gs) {
                    let out = if gs == gstart { first } else { omega };
                    fst.add_arc(map[gs], Transition::new(gt.ilabel, out, Weight::ONE, map[gt.next]));
                }
                if g.is_final(gs) {
                    fst.add_arc(map[gs], Transition::new(EPSILON, EPSILON, Weight::ONE, tr.next));
                }
            }
        }
    }
    info.retain(|_, i| !matches!(i.kind, SymbolKind::Placeholder { .. }));
    let mut out = IndexTransducer {
        fst,
        symbols,
        examples: index.examples.clone(),
        info,
        library: index.library.clone(),
    };
    // placeholder symbols stay in the table but no longer label any arc
    out.info.extend(
        index
            .info
            .iter()
            .filter(|(_, i)| matches!(i.kind, SymbolKind::Placeholder { .. }))
            .map(|(&l, &i)| (l, i)),
    );
    Ok(out)
}

/// Library → index with entities inlined.
pub fn compile(library: &IntentLibrary) -> Result<IndexTransducer, LibraryError> {
    library.validate()?;
    let mut symbols = SymbolTable::new();
    let mut grammars = BTreeMap::new();
    for (name, phrases) in &library.entities {
        grammars.insert(name.clone(), build_entity_grammar(name, phrases, &mut symbols)?);
    }
    let index = build_index(library, symbols)?;
    replace_entities(&index, &grammars)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compose::compose_sigma;
    use crate::fst::enumerate_paths;

    fn three_intents() -> IntentLibrary {
        let mut lib = IntentLibrary::new();
        lib.add_entity("__SYSTEM_TIME__", &["seven p m", "tomorrow at seven"]);
        lib.add_intent("cancel", "Cancellation");
        lib.add_example("cancel", "cancel account please", 1);
        lib.add_intent("apology", "Apology");
        lib.add_example("apology", "i apologize", 0);
        lib.add_example("apology", "am sorry", 0);
        lib.add_intent("tickets", "Tickets");
        lib.add_example("tickets", "tickets __SYSTEM_TIME__", 0);
        lib
    }

    fn outputs(index: &IndexTransducer, words: &[&str]) -> Vec<Vec<String>> {
        let mut symbols = index.symbols.clone();
        let labels: Vec<Label> = words.iter().map(|w| symbols.intern(w)).collect();
        let lat = Fst::linear(&labels, &[]);
        let comp = compose_sigma(&lat, &index.fst, &symbols).unwrap();
        let mut out: Vec<Vec<String>> = enumerate_paths(&comp.fst, 1000)
            .unwrap()
            .iter()
            .map(|p| {
                p.output_labels(&comp.fst)
                    .into_iter()
                    .filter(|&l| l != EPSILON)
                    .map(|l| symbols.resolve(l).to_string())
                    .collect()
            })
            .collect();
        out.sort();
        out
    }

    #[test]
    fn root_structure() {
        let index = compile(&three_intents()).unwrap();
        let root_loops: Vec<_> = index
            .fst
            .arcs(ROOT)
            .iter()
            .filter(|t| t.next == ROOT)
            .collect();
        assert_eq!(root_loops.len(), 1);
        assert_eq!((root_loops[0].ilabel, root_loops[0].olabel), (SIGMA, EPSILON));
        assert!(index.fst.is_final(ROOT));
        for t in index.fst.arcs(ROOT).iter().filter(|t| t.next != ROOT) {
            assert_ne!(t.ilabel, EPSILON);
            assert_eq!(index.symbol_info(t.olabel).unwrap().kind, SymbolKind::Begin);
        }
        assert_eq!(index.stats().branch_families, 3);
        assert_eq!(index.stats().examples, 4);
        assert!(!index.has_placeholders());
    }

    #[test]
    fn quota_one_example_has_wildcards_between_words() {
        let index = build_index(&three_intents(), SymbolTable::new()).unwrap();
        // cancel -> s1 (σ loop) -> account -> s2 (σ loop) -> please -> s3 -> ε:ι_E
        let wild: usize = (1..=3)
            .map(|s| index.fst.arcs(s).iter().filter(|t| t.ilabel == SIGMA).count())
            .sum();
        assert_eq!(wild, 2);
        assert!(index.has_placeholders());
    }

    #[test]
    fn entity_branch_matches_after_replacement() {
        let index = compile(&three_intents()).unwrap();
        let out = outputs(&index, &["tickets", "tomorrow", "at", "seven"]);
        assert!(out.contains(&vec![
            "<ib:tickets/0>".to_string(),
            "<w:tickets/0:1>".into(),
            "<w:tickets/0:1>".into(),
            "<w:tickets/0:1>".into(),
            "<ie:tickets/0>".into()
        ]));
        assert!(out.contains(&vec![]));
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn entity_in_first_position_begins_on_entity_word() {
        let mut lib = IntentLibrary::new();
        lib.add_entity("__N__", &["three", "twenty one"]);
        lib.add_example("count", "__N__ tickets", 0);
        let index = compile(&lib).unwrap();
        let out = outputs(&index, &["twenty", "one", "tickets"]);
        assert!(out.contains(&vec![
            "<ib:count/0>".to_string(),
            "<w:count/0:0>".into(),
            "<ic:count/0>".into(),
            "<ie:count/0>".into()
        ]));
    }

    #[test]
    fn empty_library_is_single_state() {
        let index = compile(&IntentLibrary::new()).unwrap();
        assert_eq!(index.fst.num_states(), 1);
        assert_eq!(index.fst.num_arcs(), 1);
        assert_eq!(outputs(&index, &["a", "b"]), vec![Vec::<String>::new()]);
    }

    #[test]
    fn replacement_without_placeholders_is_identity() {
        let mut lib = IntentLibrary::new();
        lib.add_example("x", "hello there", 1);
        let index = build_index(&lib, SymbolTable::new()).unwrap();
        let replaced = replace_entities(&index, &BTreeMap::new()).unwrap();
        assert_eq!(replaced, index);
    }

    #[test]
    fn missing_grammar_is_reported() {
        let index = build_index(&three_intents(), SymbolTable::new()).unwrap();
        assert_eq!(
            replace_entities(&index, &BTreeMap::new()),
            Err(LibraryError::MissingGrammar("__SYSTEM_TIME__".into()))
        );
    }

    #[test]
    fn artifact_round_trip() {
        let index = compile(&three_intents()).unwrap();
        let text = index.to_artifact();
        let back = IndexTransducer::from_artifact(&text).unwrap();
        assert_eq!(back, index);
        assert_eq!(back.to_artifact(), text);
    }
}
