//! Checks both wire formats against fixture files produced by an
//! independent implementation of the documented layouts, so packing
//! mistakes that a self-round-trip would absorb fail loudly here.

use perseus_core::{
    deserialize_params, protect, read_frames, serialize_params, unprotect, write_frames,
    ConvCode, Gf2Poly, NoiseKey, PayloadMode, PuncturedCode, SessionParams,
};

fn fixture(name: &str) -> Vec<u8> {
    let path = format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read(&path).unwrap_or_else(|e| panic!("reading {path}: {e}"))
}

/// The parameters the fixtures were generated with: the worked rate-1/2
/// memory-2 code under the 3-of-4 pattern.
fn fixture_params() -> SessionParams {
    let base = ConvCode::new(
        1,
        2,
        2,
        vec![vec![
            Gf2Poly::from_support(&[0, 2]),
            Gf2Poly::from_support(&[0, 1, 2]),
        ]],
    )
    .unwrap();
    let code = PuncturedCode::new(base, &[vec![true, false], vec![true, true]]).unwrap();
    SessionParams {
        code,
        key: NoiseKey {
            inits: [0x5A5A5, 0x123456, 0xABCDEF1, 0x7654321],
        },
        bf: 0x9D21,
        proba: 25,
    }
}

#[test]
fn params_blob_matches_independent_implementation() {
    let blob = fixture("example1.prss");
    let expected = fixture_params();
    assert_eq!(deserialize_params(&blob).unwrap(), expected);
    assert_eq!(serialize_params(&expected), blob);
}

#[test]
fn frame_containers_match_independent_implementation() {
    let sp = fixture_params();
    let plain = fixture("example1_plain.bin");
    for (name, mode) in [
        ("example1_frames_hex.bin", PayloadMode::Hex),
        ("example1_frames_binary.bin", PayloadMode::Binary),
    ] {
        let container = fixture(name);
        let frames = read_frames(&container, mode).unwrap();
        assert_eq!(frames.len(), 4, "{name}");
        assert_eq!(unprotect(&sp, &frames).unwrap(), plain, "{name}");

        let ours = protect(&sp, &plain, 32).unwrap();
        assert_eq!(write_frames(&ours, mode), container, "{name}");
    }
}
