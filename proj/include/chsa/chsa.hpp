#pragma once

#include <chsa/analysis.hpp>
#include <chsa/datagen.hpp>
#include <chsa/error.hpp>
#include <chsa/io.hpp>
#include <chsa/ipm.hpp>
#include <chsa/neighbors.hpp>
#include <chsa/pointcloud.hpp>
#include <chsa/qp.hpp>
#include <chsa/report.hpp>
#include <chsa/stratify.hpp>
#include <chsa/svg.hpp>
