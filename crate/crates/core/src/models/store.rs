//! Case models kept as versioned repository documents.

use std::collections::BTreeMap;

use thiserror::Error;

use super::model::{parse_model, serialize_model, CaseModel, ModelError};
use crate::repo::{
    BaseType, ContentStream, DataKind, NewObject, ObjectId, ObjectRecord, ObjectService, PropertyDefinition,
    PropertyValue, RepoError, TypeDefinition, DESCRIPTION, NAME_PROPERTY,
};

/// Document type of stored models.
pub const MODEL_TYPE: &str = "cmmn:caseModel";
/// Property of [`MODEL_TYPE`] holding the model's key.
pub const MODEL_ID: &str = "cmmn:modelId";
/// Folder, directly below the repository root, that holds stored models.
pub const MODELS_FOLDER: &str = "Case models";
pub const MODEL_MIME_TYPE: &str = "application/json";

#[derive(Debug, Error)]
pub enum ModelStoreError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Repo(#[from] RepoError),
    #[error("object `{0}` has no model content")]
    NoContent(ObjectId),
}

fn ensure_type(service: &dyn ObjectService) -> Result<(), RepoError> {
    match service.get_type(MODEL_TYPE) {
        Ok(_) => Ok(()),
        Err(RepoError::TypeNotFound(_)) => {
            let def = TypeDefinition::new(MODEL_TYPE, BaseType::Document)
                .display_name("Case model")
                .property(PropertyDefinition::new(MODEL_ID, DataKind::String).required());
            match service.create_type(def) {
                Ok(_) | Err(RepoError::DuplicateType(_)) => Ok(()),
                Err(e) => Err(e),
            }
        }
        Err(e) => Err(e),
    }
}

fn models_folder(service: &dyn ObjectService) -> Result<ObjectId, RepoError> {
    let root = service.info()?.root_folder_id;
    if let Some(f) = service
        .get_children(&root)?
        .into_iter()
        .find(|c| c.is_folder() && c.name == MODELS_FOLDER)
    {
        return Ok(f.object_id);
    }
    Ok(service
        .create_object(NewObject::folder(MODELS_FOLDER).in_folder(root))?
        .object_id)
}

/// Stored model documents, one per model key (latest versions).
pub fn stored_models(service: &dyn ObjectService) -> Result<Vec<ObjectRecord>, RepoError> {
    let folder = models_folder(service)?;
    Ok(service
        .get_children(&folder)?
        .into_iter()
        .filter(|c| c.type_id == MODEL_TYPE)
        .collect())
}

/// Stores `model`, checking in a new version when a model with the same key
/// was stored before. Returns the id of the version written.
pub fn store_model(service: &dyn ObjectService, model: &CaseModel) -> Result<ObjectRecord, ModelStoreError> {
    model.validate()?;
    ensure_type(service)?;
    let content = ContentStream::new(MODEL_MIME_TYPE, serialize_model(model));
    let mut props = BTreeMap::new();
    if let Some(d) = &model.description {
        props.insert(DESCRIPTION.to_string(), PropertyValue::string(d));
    }
    let existing = stored_models(service)?
        .into_iter()
        .find(|r| r.properties.get(MODEL_ID).and_then(|v| v.as_str()) == Some(model.key()));
    let record = match existing {
        Some(prev) => {
            let mut id = prev.object_id.clone();
            if prev.name != model.name {
                let rename = BTreeMap::from([(NAME_PROPERTY.to_string(), PropertyValue::string(&model.name))]);
                id = service.update_properties(&id, rename)?.object_id;
            }
            service.checkin(&id, Some(content), props)?
        }
        None => {
            props.insert(MODEL_ID.to_string(), PropertyValue::string(model.key()));
            let new = NewObject {
                properties: props,
                parent_id: Some(models_folder(service)?),
                content: Some(content),
                ..NewObject::new(MODEL_TYPE, &model.name)
            };
            service.create_object(new)?
        }
    };
    Ok(record)
}

pub fn load_model(service: &dyn ObjectService, id: &ObjectId) -> Result<CaseModel, ModelStoreError> {
    let content = service
        .get_content(id)?
        .ok_or_else(|| ModelStoreError::NoContent(id.clone()))?;
    Ok(parse_model(&content.bytes)?)
}
