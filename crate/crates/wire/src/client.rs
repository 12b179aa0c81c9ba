//! [`ObjectService`] over HTTP.

use std::collections::BTreeMap;
use std::time::Duration;

use casefs_core::repo::{
    Ace, ChangePage, ContentStream, NewObject, ObjectId, ObjectRecord, ObjectService, PropertyValue, RepoError,
    RepositoryInfo, Result, TypeDefinition,
};
use reqwest::blocking::{Client, RequestBuilder, Response};
use reqwest::header::CONTENT_TYPE;
use reqwest::StatusCode;
use serde::de::DeserializeOwned;

use crate::dto::{
    ascii_json, AclRequest, CheckinRequest, CreateRequest, PatchRequest, TypeCreated, WireError, CHECKIN_HEADER,
    OBJECT_HEADER, PRINCIPAL_HEADER,
};

/// Blocking HTTP client acting for one principal.
///
/// Must not be used from inside an async runtime.
#[derive(Debug, Clone)]
pub struct HttpClient {
    base: String,
    principal: String,
    http: Client,
}

impl HttpClient {
    pub fn new(base: impl Into<String>, principal: impl Into<String>) -> Result<Self> {
        let http = Client::builder()
            .timeout(Duration::from_secs(30))
            .build()
            .map_err(|e| RepoError::Transport(e.to_string()))?;
        Ok(HttpClient {
            base: base.into().trim_end_matches('/').to_string(),
            principal: principal.into(),
            http,
        })
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    pub fn principal(&self) -> &str {
        &self.principal
    }

    fn url(&self, path: &str) -> String {
        format!("{}{}", self.base, path)
    }

    fn object_url(&self, id: &ObjectId, rest: &str) -> String {
        self.url(&format!("/object/{}{}", encode(id.as_str()), rest))
    }

    fn send(&self, req: RequestBuilder) -> Result<Response> {
        let resp = req
            .header(PRINCIPAL_HEADER, &self.principal)
            .send()
            .map_err(|e| RepoError::Transport(e.to_string()))?;
        let status = resp.status();
        if status.is_success() {
            return Ok(resp);
        }
        let text = resp.text().map_err(|e| RepoError::Transport(e.to_string()))?;
        Err(match serde_json::from_str::<WireError>(&text) {
            Ok(body) => body.into_error(status.as_u16()),
            Err(_) => RepoError::Remote {
                status: status.as_u16(),
                code: "http".into(),
                message: format!("{status}: {text}"),
            },
        })
    }

    fn json<T: DeserializeOwned>(&self, req: RequestBuilder) -> Result<T> {
        let text = self
            .send(req)?
            .text()
            .map_err(|e| RepoError::Transport(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| RepoError::Transport(format!("bad response body: {e}")))
    }

    fn json_body<B: serde::Serialize>(&self, req: RequestBuilder, body: &B) -> RequestBuilder {
        req.header(CONTENT_TYPE, "application/json")
            .body(serde_json::to_vec(body).expect("wire bodies serialize"))
    }

    fn patch(&self, id: &ObjectId, body: PatchRequest) -> Result<ObjectRecord> {
        let req = self.json_body(self.http.patch(self.object_url(id, "")), &body);
        self.json(req)
    }
}

/// Percent-encodes a path segment or query value.
fn encode(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for b in s.bytes() {
        if b.is_ascii_alphanumeric() || b"-._~".contains(&b) {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

impl ObjectService for HttpClient {
    fn info(&self) -> Result<RepositoryInfo> {
        self.json(self.http.get(self.url("/repo")))
    }

    fn create_type(&self, def: TypeDefinition) -> Result<String> {
        let req = self.json_body(self.http.post(self.url("/types")), &def);
        self.json::<TypeCreated>(req).map(|t| t.type_id)
    }

    fn get_type(&self, type_id: &str) -> Result<TypeDefinition> {
        self.json(self.http.get(self.url(&format!("/types/{}", encode(type_id)))))
    }

    fn get_object(&self, id: &ObjectId) -> Result<ObjectRecord> {
        self.json(self.http.get(self.object_url(id, "")))
    }

    fn get_latest(&self, id: &ObjectId) -> Result<ObjectRecord> {
        self.json(self.http.get(self.object_url(id, "?latest=true")))
    }

    fn get_children(&self, folder_id: &ObjectId) -> Result<Vec<ObjectRecord>> {
        self.json(self.http.get(self.object_url(folder_id, "/children")))
    }

    fn get_relationships(&self, id: &ObjectId) -> Result<Vec<ObjectRecord>> {
        self.json(self.http.get(self.object_url(id, "/relationships")))
    }

    fn get_content(&self, id: &ObjectId) -> Result<Option<ContentStream>> {
        let resp = self.send(self.http.get(self.object_url(id, "/content")))?;
        if resp.status() == StatusCode::NO_CONTENT {
            return Ok(None);
        }
        let mime = resp
            .headers()
            .get(CONTENT_TYPE)
            .and_then(|v| v.to_str().ok())
            .unwrap_or("application/octet-stream")
            .to_string();
        let bytes = resp.bytes().map_err(|e| RepoError::Transport(e.to_string()))?;
        Ok(Some(ContentStream::new(mime, bytes.to_vec())))
    }

    fn create_object(&self, new: NewObject) -> Result<ObjectRecord> {
        let meta = CreateRequest {
            type_id: new.type_id,
            name: new.name,
            properties: new.properties,
            parent_id: new.parent_id,
            source_id: new.source_id,
            target_id: new.target_id,
        };
        let req = self.http.post(self.url("/object"));
        let req = match new.content {
            Some(c) => req
                .header(OBJECT_HEADER, ascii_json(&meta))
                .header(CONTENT_TYPE, c.mime_type)
                .body(c.bytes),
            None => self.json_body(req, &meta),
        };
        self.json(req)
    }

    fn update_properties(&self, id: &ObjectId, patch: BTreeMap<String, PropertyValue>) -> Result<ObjectRecord> {
        self.patch(
            id,
            PatchRequest {
                properties: patch,
                ..Default::default()
            },
        )
    }

    fn file_in(&self, id: &ObjectId, folder_id: &ObjectId) -> Result<ObjectRecord> {
        self.patch(
            id,
            PatchRequest {
                add_parent_id: Some(folder_id.clone()),
                ..Default::default()
            },
        )
    }

    fn unfile(&self, id: &ObjectId, folder_id: &ObjectId) -> Result<ObjectRecord> {
        self.patch(
            id,
            PatchRequest {
                remove_parent_id: Some(folder_id.clone()),
                ..Default::default()
            },
        )
    }

    fn set_content(&self, id: &ObjectId, content: ContentStream) -> Result<ObjectRecord> {
        let req = self
            .http
            .put(self.object_url(id, "/content"))
            .header(CONTENT_TYPE, content.mime_type)
            .body(content.bytes);
        self.json(req)
    }

    fn delete_object(&self, id: &ObjectId) -> Result<()> {
        self.send(self.http.delete(self.object_url(id, ""))).map(drop)
    }

    fn checkin(
        &self,
        id: &ObjectId,
        content: Option<ContentStream>,
        patch: BTreeMap<String, PropertyValue>,
    ) -> Result<ObjectRecord> {
        let body = CheckinRequest { properties: patch };
        let req = self.http.post(self.object_url(id, "/checkin"));
        let req = match content {
            Some(c) => req
                .header(CHECKIN_HEADER, ascii_json(&body))
                .header(CONTENT_TYPE, c.mime_type)
                .body(c.bytes),
            None => self.json_body(req, &body),
        };
        self.json(req)
    }

    fn apply_acl(&self, id: &ObjectId, acl: Vec<Ace>) -> Result<ObjectRecord> {
        let req = self.json_body(self.http.post(self.object_url(id, "/acl")), &AclRequest { acl });
        self.json(req)
    }

    fn get_content_changes(&self, from_token: u64, max: usize) -> Result<ChangePage> {
        self.json(
            self.http
                .get(self.url(&format!("/changes?token={from_token}&max={max}"))),
        )
    }

    fn case_roots(&self) -> Result<Vec<ObjectRecord>> {
        self.json(self.http.get(self.url("/cases")))
    }

    fn descendants(&self, folder_id: &ObjectId) -> Result<Vec<ObjectRecord>> {
        self.json(self.http.get(self.object_url(folder_id, "/descendants")))
    }
}
