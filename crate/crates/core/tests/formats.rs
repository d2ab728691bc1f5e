use measmap::geometry::check_segment_containment;
use measmap::json::{from_json_str, to_json_string, MatrixJson};
use measmap::maps::{builtin, MapJson, MeasurementMap};
use measmap::reconstruct::SamplePairJson;
use measmap::state::random::{random_density, random_invertible};
use measmap::DensityOperator;

#[test]
fn density_document_shape() {
    let rho = DensityOperator::diagonal(&[0.25, 0.75]).unwrap();
    let json = to_json_string(&MatrixJson::from_density(&rho)).unwrap();
    assert_eq!(
        json,
        r#"{"kind":"density","n":2,"re":[[2.5000000000000000e-1,0.0000000000000000e0],[0.0000000000000000e0,7.5000000000000000e-1]],"im":[[0.0000000000000000e0,0.0000000000000000e0],[0.0000000000000000e0,0.0000000000000000e0]]}"#
    );
}

#[test]
fn map_round_trip_is_exact() {
    for transposed in [false, true] {
        let map = MeasurementMap::new(random_invertible(4, 2, 100.0).unwrap(), transposed).unwrap();
        let json = to_json_string(&MapJson::from_measurement(&map)).unwrap();
        let back: MapJson = from_json_str(&json).unwrap();
        assert_eq!(back.to_measurement().unwrap(), map);
        assert_eq!(to_json_string(&back).unwrap(), json);
    }
}

#[test]
fn invalid_documents_rejected() {
    assert!(from_json_str::<MapJson>(r#"{"kind":"unknown"}"#).is_err());
    let not_psd = r#"{"kind":"density","n":2,"re":[[1.5,0.0],[0.0,-0.5]],"im":[[0.0,0.0],[0.0,0.0]]}"#;
    let m: MatrixJson = from_json_str(not_psd).unwrap();
    assert!(m.to_density().is_err());
    let singular = r#"{"kind":"measurement","transpose":false,"M":{"kind":"matrix","n":2,"re":[[1.0,1.0],[1.0,1.0]],"im":[[0.0,0.0],[0.0,0.0]]}}"#;
    assert!(from_json_str::<MapJson>(singular).unwrap().to_measurement().is_err());
}

#[test]
fn sample_pairs_parse() {
    let rho = random_density(3, 1);
    let json = to_json_string(&vec![SamplePairJson::new(&rho, &rho)]).unwrap();
    let back: Vec<SamplePairJson> = from_json_str(&json).unwrap();
    assert_eq!(back[0].to_pair().unwrap().0, rho);
}

#[test]
fn certificates_serialize_reproducibly() {
    let a = to_json_string(&check_segment_containment(&*builtin::mixer(3), 4, 3, 1e-8, 5).unwrap()).unwrap();
    let b = to_json_string(&check_segment_containment(&*builtin::mixer(3), 4, 3, 1e-8, 5).unwrap()).unwrap();
    assert_eq!(a, b);
    for key in ["\"satisfied\":true", "\"worst_deviation\"", "\"worst_pair\"", "\"tolerance\"", "\"seed\":5", "\"samples\":4"] {
        assert!(a.contains(key), "{key}");
    }
}
