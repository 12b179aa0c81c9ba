//! Design-time case models: the model format with its repository extension
//! attributes, storage as versioned documents, and the CMMN 1.0 downgrade.
//!
//! Models are JSON documents with top-level `name`, `definitions` and
//! `items`. Extension attributes (`CMISObjectId`, `index`, `CMISTypeId`,
//! `CMISPropertyId`) live in `ext` objects, so [`export_compat10`] only has
//! to drop those and rewrite the extended URIs.

mod model;
mod store;

pub use model::{
    export_compat10, parse_model, serialize_model, CaseFileItemDecl, CaseFileItemDefinitionDecl, CaseModel,
    DefinitionExt, ItemExt, ModelError, PropertyDecl, PropertyExt,
};
pub use store::{
    load_model, store_model, stored_models, ModelStoreError, MODELS_FOLDER, MODEL_ID, MODEL_MIME_TYPE, MODEL_TYPE,
};
