//! PNG encoding of rendered views.

use facefuse_core::viewsynth::ViewImage;

use crate::error::{Error, Result};

/// 8-bit grayscale or RGB PNG.
pub fn encode_png(img: &ViewImage) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, img.width as u32, img.height as u32);
        enc.set_color(match img.channels {
            1 => png::ColorType::Grayscale,
            3 => png::ColorType::Rgb,
            n => return Err(Error::Internal(format!("unsupported channel count {n}"))),
        });
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc.write_header().map_err(|e| Error::Internal(e.to_string()))?;
        w.write_image_data(&img.to_u8())
            .map_err(|e| Error::Internal(e.to_string()))?;
    }
    Ok(out)
}

/// Decodes to `(width, height, channels, samples)`.
pub fn decode_png(bytes: &[u8]) -> Result<(usize, usize, usize, Vec<u8>)> {
    let dec = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = dec
        .read_info()
        .map_err(|e| Error::Validation(format!("bad PNG: {e}")))?;
    let mut buf = vec![0; reader.output_buffer_size().unwrap_or(0)];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::Validation(format!("bad PNG: {e}")))?;
    buf.truncate(info.buffer_size());
    Ok((
        info.width as usize,
        info.height as usize,
        info.color_type.samples(),
        buf,
    ))
}
