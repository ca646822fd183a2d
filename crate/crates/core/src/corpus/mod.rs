//! CoNLL corpora, vocabularies and predicate–argument instances.

mod conll;
mod instance;
mod vocab;

pub use conll::{
    parse_conll, span_head, write_conll, Format, GoldArgument, ParseError, PredicateAnnotation,
    Sentence, SyntaxColumns, Token, EMPTY,
};
pub use instance::{
    argument_lemma, build_vocabulary, draft_instances, extract_instances, index_draft, is_verbal,
    ArgumentDraft, ArgumentInstance, ExtractOptions, InstanceDraft, PredicateInstance,
};
pub use vocab::{Lexicon, Vocabulary, UNK};
