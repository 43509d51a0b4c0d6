use serde_json::json;

use crate::provider::{decode_png_base64, encode_png_base64, str_field, HttpClient, ProviderError};
use crate::raster::RasterImage;

use super::{
    edit_image_prompt, require_text, suggestion_prompt, text_to_image_prompt, truncate_words, BackendConfig,
    GuidanceError, GuidanceTools, CAPTION_PROMPT,
};

/// Remote guidance backend. Each tool is a POST route under the base URL:
/// `text_to_image`, `edit_image`, `caption` and `suggest`.
#[derive(Clone, Debug)]
pub struct HttpGuidance {
    client: HttpClient,
    resolution: u32,
}

impl HttpGuidance {
    pub fn new(base_url: String, cfg: &BackendConfig) -> Self {
        let mut client = HttpClient::new(base_url, cfg.timeout, cfg.max_retries);
        client.api_key = cfg.api_key.clone();
        HttpGuidance {
            client,
            resolution: cfg.resolution,
        }
    }
}

fn non_empty(text: &str) -> Result<String, GuidanceError> {
    let t = truncate_words(text);
    if t.is_empty() {
        return Err(ProviderError::MalformedResponse("empty text in reply".into()).into());
    }
    Ok(t)
}

impl GuidanceTools for HttpGuidance {
    fn provider(&self) -> String {
        format!("http:{}", self.client.base_url)
    }

    fn text_to_image(&self, text: &str, seed: u64) -> Result<RasterImage, GuidanceError> {
        require_text(text)?;
        let body = json!({ "prompt": text_to_image_prompt(text), "seed": seed, "resolution": self.resolution });
        let reply = self.client.post_json("text_to_image", &body)?;
        let image = decode_png_base64(str_field(&reply, "png_base64")?)?;
        if image.width() != image.height() {
            return Err(ProviderError::MalformedResponse(format!(
                "expected a square image, got {}x{}",
                image.width(),
                image.height()
            ))
            .into());
        }
        Ok(image)
    }

    fn edit_image(&self, image: &RasterImage, text: &str, _seed: u64) -> Result<RasterImage, GuidanceError> {
        require_text(text)?;
        let body = json!({ "png_base64": encode_png_base64(image), "prompt": edit_image_prompt(text) });
        let reply = self.client.post_json("edit_image", &body)?;
        let edited = decode_png_base64(str_field(&reply, "png_base64")?)?;
        if (edited.width(), edited.height()) != (image.width(), image.height()) {
            return Err(ProviderError::MalformedResponse(format!(
                "edited image is {}x{}, input was {}x{}",
                edited.width(),
                edited.height(),
                image.width(),
                image.height()
            ))
            .into());
        }
        Ok(edited)
    }

    fn caption_image(&self, image: &RasterImage, _seed: u64) -> Result<String, GuidanceError> {
        let body = json!({ "png_base64": encode_png_base64(image), "prompt": CAPTION_PROMPT });
        let reply = self.client.post_json("caption", &body)?;
        non_empty(str_field(&reply, "text")?)
    }

    fn suggest_completion(&self, text: &str, partial_image: &RasterImage, _seed: u64) -> Result<String, GuidanceError> {
        require_text(text)?;
        let body = json!({ "prompt": suggestion_prompt(text), "png_base64": encode_png_base64(partial_image) });
        let reply = self.client.post_json("suggest", &body)?;
        non_empty(str_field(&reply, "text")?)
    }
}
