use oiqa_core::io::{read_ratings, write_csv, RatingRow};
use oiqa_core::subjective::{beta2_normality, compute_mos, screen_subjects, Rating, ScoreMatrix, ScreeningMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn rating(s: &str, i: &str, v: f64) -> Rating {
    Rating { subject: s.into(), image: i.into(), score: v }
}

/// Nine raters tracking a latent quality with small noise plus one rater
/// answering uniformly at random.
fn corpus(seed: u64, images: usize) -> Vec<Rating> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.35).unwrap();
    let mut out = Vec::new();
    for i in 0..images {
        let img = format!("img{i:03}");
        let q: f64 = rng.random_range(2.0..4.0);
        for s in 0..9 {
            let v = (q + noise.sample(&mut rng)).clamp(1.0, 5.0);
            out.push(rating(&format!("peer{s}"), &img, v));
        }
        out.push(rating("random", &img, rng.random_range(1.0..5.0)));
    }
    out
}

#[test]
fn random_rater_is_rejected_in_most_runs() {
    let mut ok = 0;
    for seed in 0..20 {
        let m = ScoreMatrix::from_ratings(&corpus(seed, 200)).unwrap();
        let out = screen_subjects(&m, ScreeningMode::PerSubject);
        if out.rejected == ["random"] {
            ok += 1;
        }
    }
    eprintln!("random rater rejected in {ok}/20 runs");
    assert!(ok >= 19, "{ok}/20");
}

#[test]
fn mos_is_the_plain_mean() {
    let ratings = vec![
        rating("a", "x", 1.0),
        rating("b", "x", 2.0),
        rating("c", "x", 4.0),
        rating("a", "y", 5.0),
        rating("b", "y", 3.0),
    ];
    let t = compute_mos(&ScoreMatrix::from_ratings(&ratings).unwrap());
    assert_eq!(t.get("x").unwrap().mos, 7.0 / 3.0);
    assert_eq!(t.get("y").unwrap().mos, 4.0);
    assert_eq!(t.get("y").unwrap().n_raters, 2);
}

#[test]
fn bimodal_kurtosis_takes_wide_interval() {
    assert_eq!(beta2_normality(&[1.0, 1.0, 5.0, 5.0]).unwrap(), 20f64.sqrt());
    assert_eq!(beta2_normality(&[1.0, 2.0, 3.0, 3.0, 3.0, 3.0, 3.0, 4.0, 5.0]).unwrap(), 2.0);
}

#[test]
fn ratings_round_trip_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("ratings.csv");
    let rows: Vec<RatingRow> = corpus(3, 5)
        .into_iter()
        .map(|r| RatingRow { subject_id: r.subject, image_id: r.image, score: r.score })
        .collect();
    write_csv(&p, &rows).unwrap();
    let back = read_ratings(&p).unwrap();
    assert_eq!(back, corpus(3, 5));
}
