use nonholo_cli::config::{Initial, System};
use nonholo_cli::parse_config;
use proptest::prelude::*;

const ROUTH: &str = r#"{"system":"routh","params":{"m":1,"I1":2,"I3":3,"grav":9.8,"r":1,"l":0.1},"initial":{"gamma":[0,0,1],"M":[0.1,0,3]},"integrator":{"dt":0.001,"t_final":10}}"#;

fn pointer_of(text: &str) -> String {
    parse_config(text).unwrap_err().pointer
}

#[test]
fn schema_example_parses_with_defaults() {
    let cfg = parse_config(ROUTH).unwrap();
    let System::Routh { body, r, l } = cfg.system else { panic!("{:?}", cfg.system) };
    assert_eq!((body.m, body.i1, body.i3, body.grav, r, l), (1.0, 2.0, 3.0, 9.8, 1.0, 0.1));
    let Initial::Solid(st) = cfg.initial else { panic!() };
    assert_eq!(st.momentum.to_array(), [0.1, 0.0, 3.0]);
    assert_eq!((cfg.integrator.dt, cfg.integrator.t_final), (1e-3, 10.0));
    assert_eq!((cfg.seed, cfg.samples), (0, 100));
    assert_eq!((cfg.momenta.delta, cfg.momenta.h), (1e-3, 1e-4));
}

#[test]
fn integrator_defaults_apply_when_omitted() {
    let text = r#"{"system":"particle","initial":{"x":0,"y":0,"z":0,"px":1,"py":1},"integrator":{"dt":0.01}}"#;
    let cfg = parse_config(text).unwrap();
    assert_eq!((cfg.integrator.dt, cfg.integrator.t_final), (0.01, 10.0));
    assert!(cfg.integrator.renormalize_gamma);
    assert_eq!(cfg.system, System::Particle);
}

#[test]
fn missing_system_points_at_system() {
    assert_eq!(pointer_of(r#"{"params":{},"initial":{}}"#), "/system");
}

#[test]
fn routh_offset_must_be_inside_the_sphere() {
    let err = parse_config(&ROUTH.replace(r#""l":0.1"#, r#""l":2"#)).unwrap_err();
    assert_eq!(err.pointer, "/params/l");
    assert!(err.message.contains("|l| < r"), "{}", err.message);
}

#[test]
fn schema_errors_carry_json_pointers() {
    assert_eq!(pointer_of(&ROUTH.replace(r#""grav":9.8"#, r#""grav":9.8,"extra":1"#)), "/params/extra");
    assert_eq!(pointer_of(&ROUTH.replace(r#""M":[0.1,0,3]"#, r#""M":[0.1,"x",3]"#)), "/initial/M/1");
    assert_eq!(pointer_of(&ROUTH.replace(r#""r":1,"#, "")), "/params/r");
    assert_eq!(pointer_of(&ROUTH.replace(r#""system":"routh""#, r#""system":"torus""#)), "/system");
    assert_eq!(pointer_of(&ROUTH.replace(r#""dt":0.001"#, r#""dt":-1"#)), "/integrator/dt");
    assert_eq!(pointer_of(&ROUTH.replace(r#""t_final":10"#, r#""t_final":10,"order":4"#)), "/integrator/order");
    assert_eq!(pointer_of(&ROUTH.replace(r#""gamma":[0,0,1]"#, r#""gamma":[0,0,2]"#)), "/initial/gamma");
    assert_eq!(pointer_of(&ROUTH.replace(r#""I1":2"#, r#""I1":0"#)), "/params/I1");
    assert_eq!(pointer_of(&ROUTH.replace("}}", r#"},"samples":0}"#)), "/samples");
    assert_eq!(pointer_of(&ROUTH.replace("}}", r#"},"momenta":{"h":0.01}}"#)), "/momenta/h");
    assert_eq!(pointer_of(&ROUTH.replace("}}", r#"},"colour":"red"}"#)), "/colour");
    assert_eq!(pointer_of("{"), "");
}

#[test]
fn ellipsoid_and_particle_schemas() {
    let e = r#"{"system":"ellipsoid","params":{"m":1,"I1":2,"I3":3,"grav":9.8,"b":2,"c":1},"initial":{"gamma":[0,0,1],"M":[0,0,1]}}"#;
    assert!(matches!(parse_config(e).unwrap().system, System::Ellipsoid { b, c, .. } if (b, c) == (2.0, 1.0)));
    assert_eq!(pointer_of(&e.replace(r#""c":1"#, r#""c":-1"#)), "/params/c");
    assert_eq!(pointer_of(&e.replace(r#""c":1"#, r#""r":1"#)), "/params/r");
    // a particle state where a solid is expected
    assert_eq!(pointer_of(&e.replace(r#"{"gamma":[0,0,1],"M":[0,0,1]}"#, r#"{"x":0}"#)), "/initial/x");
    let p = r#"{"system":"particle","params":{"m":1},"initial":{"x":0,"y":0,"z":0,"px":1,"py":1}}"#;
    assert_eq!(pointer_of(p), "/params/m");
    assert_eq!(pointer_of(r#"{"system":"routh","initial":{"gamma":[0,0,1],"M":[0,0,1]}}"#), "/params");
}

#[test]
fn seed_override() {
    let cfg = parse_config(ROUTH).unwrap();
    assert_eq!(cfg.clone().with_seed_override(None).unwrap().seed, 0);
    assert_eq!(cfg.clone().with_seed_override(Some("42")).unwrap().seed, 42);
    assert_eq!(cfg.with_seed_override(Some("-3")).unwrap_err().pointer, "/seed");
}

fn arb_config_text() -> impl Strategy<Value = String> {
    let solid = (
        prop_oneof![Just("routh"), Just("ellipsoid")],
        (0.1f64..5.0, 0.1f64..5.0, 0.1f64..5.0, 0.0f64..20.0),
        (0.1f64..3.0, -0.99f64..0.99),
        (-1.0f64..1.0, 0.0f64..std::f64::consts::TAU),
        prop::array::uniform3(-3.0f64..3.0),
    )
        .prop_map(|(sys, (m, i1, i3, grav), (a, f), (z, phi), mm)| {
            let q = (1.0 - z * z).sqrt();
            let g = [q * phi.cos(), q * phi.sin(), z];
            let shape = if sys == "routh" {
                format!(r#""r":{a:?},"l":{:?}"#, f * a)
            } else {
                format!(r#""b":{a:?},"c":{:?}"#, a * (1.5 + f))
            };
            format!(
                r#"{{"system":"{sys}","params":{{"m":{m:?},"I1":{i1:?},"I3":{i3:?},"grav":{grav:?},{shape}}},"initial":{{"gamma":{g:?},"M":{mm:?}}}}}"#
            )
        });
    let particle = prop::array::uniform5(-2.0f64..2.0).prop_map(|v| {
        format!(
            r#"{{"system":"particle","initial":{{"x":{:?},"y":{:?},"z":{:?},"px":{:?},"py":{:?}}}}}"#,
            v[0], v[1], v[2], v[3], v[4]
        )
    });
    let extras = (1e-4f64..1e-2, 1.0f64..20.0, any::<u64>(), 1usize..500, 1e-6f64..0.1, 1e-5f64..1e-3);
    (prop_oneof![solid, particle], extras).prop_map(|(base, (dt, t_final, seed, samples, delta, h))| {
        let tail = format!(
            r#","integrator":{{"dt":{dt:?},"t_final":{t_final:?}}},"seed":{seed},"samples":{samples},"momenta":{{"delta":{delta:?},"h":{h:?}}}}}"#
        );
        format!("{}{tail}", &base[..base.len() - 1])
    })
}

proptest! {
    #[test]
    fn serialise_then_parse_is_identity(text in arb_config_text()) {
        let cfg = parse_config(&text).unwrap();
        let again = parse_config(&cfg.to_json()).unwrap();
        prop_assert_eq!(again, cfg);
    }
}
