#ifndef UAVTRACK_UAVTRACK_HPP
#define UAVTRACK_UAVTRACK_HPP

#include <uavtrack/beamforming.hpp>
#include <uavtrack/campaign.hpp>
#include <uavtrack/channel.hpp>
#include <uavtrack/config.hpp>
#include <uavtrack/errors.hpp>
#include <uavtrack/geometry.hpp>
#include <uavtrack/gpr.hpp>
#include <uavtrack/metrics.hpp>
#include <uavtrack/mobility.hpp>
#include <uavtrack/rng.hpp>
#include <uavtrack/sensors.hpp>
#include <uavtrack/tables.hpp>
#include <uavtrack/tracking.hpp>

#endif
