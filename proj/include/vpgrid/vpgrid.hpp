#pragma once

#include "vpgrid/annotation.hpp"
#include "vpgrid/core.hpp"
#include "vpgrid/io.hpp"
#include "vpgrid/lane_post.hpp"
#include "vpgrid/losses.hpp"
#include "vpgrid/marking_post.hpp"
#include "vpgrid/metrics.hpp"
#include "vpgrid/netspec.hpp"
#include "vpgrid/synth.hpp"
#include "vpgrid/vpp.hpp"
