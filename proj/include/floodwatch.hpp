#pragma once

// Umbrella header for the floodwatch toolkit.

#include "floodwatch/baselines.hpp"
#include "floodwatch/config.hpp"
#include "floodwatch/csv.hpp"
#include "floodwatch/elliptic_envelope.hpp"
#include "floodwatch/ensemble.hpp"
#include "floodwatch/errors.hpp"
#include "floodwatch/evaluation.hpp"
#include "floodwatch/features.hpp"
#include "floodwatch/io.hpp"
#include "floodwatch/isolation_forest.hpp"
#include "floodwatch/matrix.hpp"
#include "floodwatch/mlcore.hpp"
#include "floodwatch/model_io.hpp"
#include "floodwatch/ocsvm.hpp"
#include "floodwatch/packet.hpp"
#include "floodwatch/pcap.hpp"
#include "floodwatch/pipeline.hpp"
#include "floodwatch/random_forest.hpp"
#include "floodwatch/rng.hpp"
#include "floodwatch/trafficgen.hpp"
