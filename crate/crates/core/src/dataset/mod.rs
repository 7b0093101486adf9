//! Motion vocabulary, recordings, session manifests and trial folds.

mod folds;
mod session;
mod vocab;

pub use folds::{enumerate_folds, make_split, FoldSpec, Split};
pub use session::{
    load_session, read_recording_csv, write_recording_csv, CombinedDef, Manifest, ManifestEntry,
    Pattern, Recording, Session,
};
pub use vocab::{MotionKind, MotionLabel, MotionVocabulary, VocabularyDef};
