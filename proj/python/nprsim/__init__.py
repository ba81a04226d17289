"""Python access to the nprsim core (sensor, acoustics, waveform, plant, countermeasures)."""

from ._nprsim import (
    COUPLING_GAIN,
    TUBE_LOSS_DB_PER_M,
    ConfigError,
    Error,
    NoResonanceError,
    ScheduleError,
    ValidationError,
    archetype_ids,
    calibration_carrier,
    characterize,
    evaluate_countermeasure,
    forged_pressure,
    helmholtz_resonant_hz,
    measured_differential,
    natural_resonant_hz,
    peak_decay,
    simulate_file,
    simulate_text,
    spl_to_pressure_amp,
    step_response,
    sweep,
    synthesize_attack,
)

__all__ = [name for name in dir() if not name.startswith("_")]
