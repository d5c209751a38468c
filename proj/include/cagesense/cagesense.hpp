#pragma once

#include "cagesense/error.hpp"
#include "cagesense/radar_model.hpp"
#include "cagesense/config_io.hpp"
#include "cagesense/frame.hpp"
#include "cagesense/fft.hpp"
#include "cagesense/scene.hpp"
#include "cagesense/simulator.hpp"
#include "cagesense/dsp.hpp"
#include "cagesense/filters.hpp"
#include "cagesense/vitals.hpp"
#include "cagesense/tracking.hpp"
#include "cagesense/pipeline.hpp"
#include "cagesense/stream_io.hpp"
#include "cagesense/metrics.hpp"
#include "cagesense/plot_data.hpp"
#include "cagesense/scenarios.hpp"
#include "cagesense/harness.hpp"
