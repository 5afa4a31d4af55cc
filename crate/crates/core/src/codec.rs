//! PNG and binary PGM (P5) reading and writing.
//!
//! Decoding accepts 8-bit grayscale, gray+alpha, RGB and RGBA PNGs and
//! 8-bit P5 PGMs. Colour inputs pass through [`to_grayscale`]; alpha is
//! dropped. Encoding always writes 8-bit grayscale with `round(v * 255)`.

use std::io::Cursor;
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::{quantize_u8, to_grayscale, ChannelRaster, Raster};

const PNG_MAGIC: &[u8] = b"\x89PNG\r\n\x1a\n";

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageFormat {
    Png,
    Pgm,
}

impl ImageFormat {
    /// Sniffs the container from its magic bytes.
    pub fn detect(bytes: &[u8]) -> Option<Self> {
        if bytes.starts_with(PNG_MAGIC) {
            Some(Self::Png)
        } else if bytes.starts_with(b"P5") {
            Some(Self::Pgm)
        } else {
            None
        }
    }

    /// `.pgm` selects PGM, anything else PNG.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("pgm") => Self::Pgm,
            _ => Self::Png,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Self::Png => "png",
            Self::Pgm => "pgm",
        }
    }
}

pub fn decode_image(bytes: &[u8], format: ImageFormat) -> Result<Raster> {
    match format {
        ImageFormat::Png => decode_png(bytes),
        ImageFormat::Pgm => decode_pgm(bytes),
    }
}

/// Decodes after detecting the container from the magic bytes.
pub fn decode_auto(bytes: &[u8]) -> Result<Raster> {
    let format = ImageFormat::detect(bytes)
        .ok_or_else(|| Error::Decode("unrecognized container (expected PNG or P5 PGM)".into()))?;
    decode_image(bytes, format)
}

/// Reads only the header and returns `(width, height)`.
pub fn probe_dimensions(bytes: &[u8]) -> Result<(usize, usize)> {
    match ImageFormat::detect(bytes) {
        Some(ImageFormat::Png) => {
            let reader = png_decoder(bytes)
                .read_info()
                .map_err(|e| Error::Decode(format!("png: {e}")))?;
            let info = reader.info();
            Ok((info.width as usize, info.height as usize))
        }
        Some(ImageFormat::Pgm) => {
            let header = parse_pgm_header(bytes)?;
            Ok((header.width, header.height))
        }
        None => Err(Error::Decode(
            "unrecognized container (expected PNG or P5 PGM)".into(),
        )),
    }
}

pub fn encode_image(r: &Raster, format: ImageFormat) -> Result<Vec<u8>> {
    let pixels: Vec<u8> = r.data().iter().map(|&v| quantize_u8(v)).collect();
    match format {
        ImageFormat::Png => encode_png(r.width(), r.height(), &pixels),
        ImageFormat::Pgm => {
            let mut out = format!("P5\n{} {}\n255\n", r.width(), r.height()).into_bytes();
            out.extend_from_slice(&pixels);
            Ok(out)
        }
    }
}

pub fn read_image(path: &Path) -> Result<Raster> {
    let bytes = std::fs::read(path)?;
    decode_auto(&bytes)
}

/// Writes PNG or PGM depending on the file extension and returns the bytes
/// written.
pub fn write_image(r: &Raster, path: &Path) -> Result<Vec<u8>> {
    let bytes = encode_image(r, ImageFormat::from_path(path))?;
    std::fs::write(path, &bytes)?;
    Ok(bytes)
}

fn png_decoder(bytes: &[u8]) -> png::Decoder<Cursor<&[u8]>> {
    let mut decoder = png::Decoder::new_with_limits(
        Cursor::new(bytes),
        png::Limits {
            bytes: usize::MAX,
        },
    );
    decoder.set_transformations(png::Transformations::IDENTITY);
    decoder
}

fn decode_png(bytes: &[u8]) -> Result<Raster> {
    let mut reader = png_decoder(bytes)
        .read_info()
        .map_err(|e| Error::Decode(format!("png: {e}")))?;
    let info = reader.info();
    let (width, height) = (info.width as usize, info.height as usize);
    if width == 0 || height == 0 {
        return Err(Error::Decode(format!("png: zero dimension {width}x{height}")));
    }
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::Unsupported(format!(
            "png bit depth {:?}; only 8-bit is supported",
            info.bit_depth
        )));
    }
    let channels = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::GrayscaleAlpha => 2,
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        png::ColorType::Indexed => {
            return Err(Error::Unsupported("indexed-colour png".into()));
        }
    };
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::Decode("png: image too large".into()))?;
    let mut buf = vec![0u8; size];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::Decode(format!("png: {e}")))?;
    let line = frame.line_size;

    let mut samples = Vec::with_capacity(width * height * channels.min(3));
    for y in 0..height {
        let row = &buf[y * line..y * line + width * channels];
        for px in row.chunks_exact(channels) {
            match channels {
                1 | 2 => samples.push(f64::from(px[0]) / 255.0),
                _ => samples.extend(px[..3].iter().map(|&b| f64::from(b) / 255.0)),
            }
        }
    }
    if channels >= 3 {
        to_grayscale(&ChannelRaster {
            width,
            height,
            channels: 3,
            data: samples,
        })
    } else {
        Raster::new(width, height, samples)
    }
}

fn encode_png(width: usize, height: usize, pixels: &[u8]) -> Result<Vec<u8>> {
    let (w, h) = (
        u32::try_from(width).map_err(|_| Error::Encode("width exceeds u32".into()))?,
        u32::try_from(height).map_err(|_| Error::Encode("height exceeds u32".into()))?,
    );
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, w, h);
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder
            .write_header()
            .map_err(|e| Error::Encode(e.to_string()))?;
        writer
            .write_image_data(pixels)
            .map_err(|e| Error::Encode(e.to_string()))?;
        writer.finish().map_err(|e| Error::Encode(e.to_string()))?;
    }
    Ok(out)
}

struct PgmHeader {
    width: usize,
    height: usize,
    data_offset: usize,
}

fn parse_pgm_header(bytes: &[u8]) -> Result<PgmHeader> {
    if !bytes.starts_with(b"P5") {
        return Err(Error::Decode("pgm: missing P5 magic".into()));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for (i, field) in fields.iter_mut().enumerate() {
        // whitespace and comments between tokens
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Decode(format!("pgm: header field {} is missing", i + 1)));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Decode("pgm: header number out of range".into()))?;
    }
    // exactly one whitespace byte separates maxval from the raster
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::Decode("pgm: header not terminated".into()));
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(Error::Decode(format!("pgm: zero dimension {width}x{height}")));
    }
    if maxval != 255 {
        return Err(Error::Unsupported(format!(
            "pgm maxval {maxval}; only 255 is supported"
        )));
    }
    Ok(PgmHeader {
        width,
        height,
        data_offset: pos + 1,
    })
}

fn decode_pgm(bytes: &[u8]) -> Result<Raster> {
    let header = parse_pgm_header(bytes)?;
    let n = header
        .width
        .checked_mul(header.height)
        .ok_or_else(|| Error::Decode("pgm: dimensions overflow".into()))?;
    let body = &bytes[header.data_offset..];
    if body.len() < n {
        return Err(Error::Decode(format!(
            "pgm: truncated raster ({} of {n} bytes)",
            body.len()
        )));
    }
    let data = body[..n].iter().map(|&b| f64::from(b) / 255.0).collect();
    Raster::new(header.width, header.height, data)
}
