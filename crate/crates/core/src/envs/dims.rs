use crate::error::{Error, Result};

/// Observation and action sizes of the six MuJoCo tasks, in table order.
/// Used only for parameter-count audits.
pub const MUJOCO_ENVS: [(&str, usize, usize); 6] = [
    ("HalfCheetah-v4", 17, 6),
    ("Walker2d-v4", 17, 6),
    ("Hopper-v4", 11, 3),
    ("InvertedPendulum-v4", 4, 1),
    ("Swimmer-v4", 8, 2),
    ("Pusher-v4", 23, 7),
];

pub fn mujoco_env_dims(name: &str) -> Result<(usize, usize)> {
    MUJOCO_ENVS
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|&(_, obs, act)| (obs, act))
        .ok_or_else(|| Error::UnknownEnv(name.to_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookups() {
        assert_eq!(mujoco_env_dims("HalfCheetah-v4").unwrap(), (17, 6));
        assert_eq!(mujoco_env_dims("InvertedPendulum-v4").unwrap(), (4, 1));
        assert_eq!(mujoco_env_dims("Pusher-v4").unwrap(), (23, 7));
        assert!(mujoco_env_dims("Ant-v4").is_err());
    }

    #[test]
    fn kan_column_audit() {
        // obs · act · (g + k) with k = 2, g = 3
        let expected = [510, 510, 165, 20, 80, 805];
        for ((_, obs, act), want) in MUJOCO_ENVS.iter().zip(expected) {
            assert_eq!(obs * act * 5, want);
        }
    }
}
