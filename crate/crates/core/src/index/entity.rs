use crate::error::LibraryError;
use crate::fst::{Fst, Transition};
use crate::symbols::{Label, SymbolTable};
use crate::weight::Weight;

/// Trie-shaped acceptor over the phrases of one entity class. Labels refer
/// to the symbol table the grammar was built with.
#[derive(Debug, Clone, PartialEq)]
pub struct EntityGrammar {
    pub name: String,
    pub phrases: Vec<Vec<String>>,
    pub fst: Fst,
}

impl EntityGrammar {
    pub fn accepts_labels(&self, labels: &[Label]) -> bool {
        let mut state = 0;
        for &l in labels {
            match self.fst.arcs(state).iter().find(|t| t.ilabel == l) {
                Some(t) => state = t.next,
                None => return false,
            }
        }
        self.fst.is_final(state)
    }

    pub fn accepts<S: AsRef<str>>(&self, tokens: &[S], symbols: &SymbolTable) -> bool {
        let labels: Option<Vec<Label>> = tokens.iter().map(|t| symbols.get(t.as_ref())).collect();
        labels.is_some_and(|l| self.accepts_labels(&l))
    }
}

/// Builds the prefix-sharing acceptor for `phrases`. Duplicate phrases
/// collapse; every phrase end is a final state.
pub fn build_entity_grammar(
    name: &str,
    phrases: &[Vec<String>],
    symbols: &mut SymbolTable,
) -> Result<EntityGrammar, LibraryError> {
    if phrases.is_empty() {
        return Err(LibraryError::EmptyEntity(name.to_string()));
    }
    let mut fst = Fst::new();
    fst.add_state();
    fst.set_start(0);
    let mut kept: Vec<Vec<String>> = Vec::new();
    for phrase in phrases {
        if phrase.is_empty() {
            return Err(LibraryError::EmptyPhrase(name.to_string()));
        }
        let mut state = 0;
        for word in phrase {
            if word.starts_with('<') && word.ends_with('>') {
                return Err(LibraryError::ReservedToken(word.clone()));
            }
            let label = symbols.intern(word);
            state = match fst.arcs(state).iter().find(|t| t.ilabel == label) {
                Some(t) => t.next,
                None => {
                    let next = fst.add_state();
                    fst.add_arc(state, Transition::acceptor(label, Weight::ONE, next));
                    next
                }
            };
        }
        if !fst.is_final(state) {
            fst.set_final(state, Weight::ONE);
            kept.push(phrase.clone());
        }
    }
    Ok(EntityGrammar {
        name: name.to_string(),
        phrases: kept,
        fst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fst::count_paths;

    fn phrases(list: &[&str]) -> Vec<Vec<String>> {
        list.iter()
            .map(|p| p.split_whitespace().map(str::to_string).collect())
            .collect()
    }

    #[test]
    fn shared_prefix_two_finals() {
        let mut syms = SymbolTable::new();
        let g = build_entity_grammar(
            "__TIME__",
            &phrases(&["seven p m", "seven forty five p m"]),
            &mut syms,
        )
        .unwrap();
        assert_eq!(g.fst.finals().count(), 2);
        assert_eq!(g.fst.arcs(0).len(), 1);
        assert_eq!(g.fst.num_states(), 8);
        assert_eq!(count_paths(&g.fst).unwrap(), 2);
        assert!(g.accepts(&["seven", "p", "m"], &syms));
        assert!(g.accepts(&["seven", "forty", "five", "p", "m"], &syms));
        assert!(!g.accepts(&["seven"], &syms));
        assert!(!g.accepts(&["seven", "forty", "p", "m"], &syms));
    }

    #[test]
    fn single_word_phrase() {
        let mut syms = SymbolTable::new();
        let g = build_entity_grammar("__N__", &phrases(&["three"]), &mut syms).unwrap();
        assert_eq!(g.fst.num_states(), 2);
        assert!(g.accepts(&["three"], &syms));
    }

    #[test]
    fn empty_inputs_rejected() {
        let mut syms = SymbolTable::new();
        assert_eq!(
            build_entity_grammar("__N__", &[], &mut syms),
            Err(LibraryError::EmptyEntity("__N__".into()))
        );
        assert_eq!(
            build_entity_grammar("__N__", &[vec![]], &mut syms),
            Err(LibraryError::EmptyPhrase("__N__".into()))
        );
    }

    #[test]
    fn prefix_phrase_is_final_mid_trie() {
        let mut syms = SymbolTable::new();
        let g = build_entity_grammar("__N__", &phrases(&["twenty one", "twenty", "twenty"]), &mut syms)
            .unwrap();
        assert_eq!(g.phrases.len(), 2);
        assert!(g.accepts(&["twenty"], &syms));
        assert!(g.accepts(&["twenty", "one"], &syms));
    }
}
