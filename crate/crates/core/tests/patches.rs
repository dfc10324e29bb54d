mod common;

use common::{default_patches, fill_split, saturated_square_png, textured_patch};
use image::{Rgb, RgbImage};
use rotalign::patchgen::*;

const WHITE: Rgb<u8> = Rgb([255, 255, 255]);
const MAGENTA: Rgb<u8> = Rgb([255, 0, 255]);

#[test]
fn saturated_square_gives_four_patches() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("square.png");
    saturated_square_png(&path);
    let set = default_patches(&load_rgb(&path).unwrap());
    assert_eq!(set.len(), 4);
    let mut origins: Vec<_> = set.patches.iter().map(|p| p.origin).collect();
    origins.sort_unstable();
    assert_eq!(origins, [(64, 64), (64, 320), (320, 64), (320, 320)]);
    for p in &set.patches {
        assert_eq!(p.pixels.dimensions(), (256, 256));
        assert_eq!(p.foreground_ratio, 1.0);
    }
}

#[test]
fn half_background_box_keeps_left_column() {
    let mask = ForegroundMask::from_fn(512, 512, |x, _| x < 256);
    let img = RgbImage::from_pixel(512, 512, MAGENTA);
    let set = extract_patches(&img, &mask, &[BoundingBox::new(0, 0, 512, 512)], &TileConfig::default()).unwrap();
    let origins: Vec<_> = set.patches.iter().map(|p| p.origin).collect();
    assert_eq!(origins.len(), 2);
    assert!(origins.iter().all(|o| o.0 == 0));
}

#[test]
fn disk_area_close_to_analytic() {
    let img = RgbImage::from_fn(200, 200, |x, y| {
        let (dx, dy) = (f64::from(x) - 100.0, f64::from(y) - 100.0);
        if dx * dx + dy * dy <= 2500.0 {
            MAGENTA
        } else {
            WHITE
        }
    });
    let mask = segment_foreground(&img, &SegmentConfig::default()).unwrap();
    let area = std::f64::consts::PI * 2500.0;
    assert!((mask.count() as f64 - area).abs() / area < 0.05);
}

#[test]
fn uniform_images() {
    let img = RgbImage::from_pixel(64, 64, MAGENTA);
    assert_eq!(
        segment_foreground(&img, &SegmentConfig::default()).unwrap().count(),
        64 * 64
    );
    let white = RgbImage::from_pixel(600, 600, WHITE);
    assert!(default_patches(&white).is_empty());
}

#[test]
fn regions_ranked_by_area() {
    let mut mask = ForegroundMask::new(100, 100);
    for (x0, y0, s) in [(70, 70, 5), (5, 5, 20), (50, 10, 10)] {
        for y in y0..y0 + s {
            for x in x0..x0 + s {
                mask.set(x, y, true);
            }
        }
    }
    assert_eq!(
        largest_regions(&mask, 2),
        [BoundingBox::new(5, 5, 20, 20), BoundingBox::new(50, 10, 10, 10)]
    );
}

#[test]
fn quarter_turns_are_exact() {
    let patch = textured_patch(256, 1);
    let quarter = RotationSpec::new(90).unwrap();
    let mut p = patch.clone();
    for _ in 0..4 {
        p = rotate_patch(&p, &quarter);
    }
    assert_eq!(p.pixels.as_raw(), patch.pixels.as_raw());

    let half = rotate_patch(&patch, &RotationSpec::new(180).unwrap());
    let twice = rotate_patch(&rotate_patch(&patch, &quarter), &quarter);
    assert_eq!(half.pixels, twice.pixels);
}

#[test]
fn quarter_turn_orientation() {
    let (a, b, c, d) = (Rgb([1, 0, 0]), Rgb([2, 0, 0]), Rgb([3, 0, 0]), Rgb([4, 0, 0]));
    let mut pixels = RgbImage::new(2, 2);
    pixels.put_pixel(0, 0, a);
    pixels.put_pixel(1, 0, b);
    pixels.put_pixel(0, 1, c);
    pixels.put_pixel(1, 1, d);
    let patch = Patch {
        pixels,
        origin: (0, 0),
        foreground_ratio: 1.0,
    };
    let r = rotate_patch(&patch, &RotationSpec::new(90).unwrap()).pixels;
    assert_eq!([*r.get_pixel(0, 0), *r.get_pixel(1, 0)], [b, d]);
    assert_eq!([*r.get_pixel(0, 1), *r.get_pixel(1, 1)], [a, c]);
}

#[test]
fn oblique_fill_stays_in_corners() {
    for interpolation in [Interpolation::Bilinear, Interpolation::Nearest] {
        for angle in [30, 45, 135, 200] {
            let spec = RotationSpec::new(angle).unwrap().with_interpolation(interpolation);
            let r = rotate_patch(&textured_patch(256, 2), &spec);
            let (inside, outside) = fill_split(&r.pixels, WHITE);
            assert_eq!(inside, 0, "{angle} {interpolation:?}");
            assert!(outside > 0, "{angle} {interpolation:?}");
        }
    }
}

#[test]
fn written_patches_and_index() {
    let dir = tempfile::tempdir().unwrap();
    let png = dir.path().join("slide.png");
    saturated_square_png(&png);
    let mut config = rotalign::report::PatchesConfig::new(&png, dir.path().join("out"));
    config.rotations = vec![RotationSpec::new(90).unwrap(), RotationSpec::new(45).unwrap()];
    let index = rotalign::report::cmd_patches(&config).unwrap();
    assert_eq!(index.patches.len(), 4);
    let text = std::fs::read_to_string(dir.path().join("out/index.json")).unwrap();
    let back: PatchIndex = serde_json::from_str(&text).unwrap();
    assert_eq!(back, index);
    let rec = &index.patches[0];
    assert_eq!(rec.files.keys().copied().collect::<Vec<_>>(), [0, 45, 90]);
    assert_eq!(rec.files[&0], patch_file_name("slide", (rec.origin_x, rec.origin_y), 0));
    for name in rec.files.values() {
        let img = load_rgb(dir.path().join("out").join(name)).unwrap();
        assert_eq!(img.dimensions(), (256, 256));
    }
}
