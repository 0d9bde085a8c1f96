"""Python surface of the stitchkit core."""

from ._stitchkit import (
    Camera,
    DatasetSample,
    PipelineResult,
    StitchCanvas,
    StitchError,
    average_blend,
    backproject,
    backward_warp,
    canvas_overlap_region,
    default_camera,
    feather_blend,
    fill_holes_diffusion,
    fit_homography,
    forward_warp_softmax,
    fundamental_from_cameras,
    generate_pair,
    gt_warp_field,
    homography_to_warp,
    importance_from_depth,
    lsgan_losses,
    make_canvas,
    masked_psnr,
    overlap_mask,
    project,
    read_flo,
    read_pfm,
    read_png_mask,
    read_png_rgb,
    read_sample,
    recon_loss,
    sample_correspondences,
    sampson_epipolar_loss,
    sigmo_total_loss,
    stitch_pipeline,
    warp_loss,
    write_flo,
    write_pfm,
    write_png_mask,
    write_png_rgb,
    write_sample,
)

__all__ = [
    "Camera",
    "DatasetSample",
    "PipelineResult",
    "StitchCanvas",
    "StitchError",
    "average_blend",
    "backproject",
    "backward_warp",
    "canvas_overlap_region",
    "default_camera",
    "feather_blend",
    "fill_holes_diffusion",
    "fit_homography",
    "forward_warp_softmax",
    "fundamental_from_cameras",
    "generate_pair",
    "gt_warp_field",
    "homography_to_warp",
    "importance_from_depth",
    "lsgan_losses",
    "make_canvas",
    "masked_psnr",
    "overlap_mask",
    "project",
    "read_flo",
    "read_pfm",
    "read_png_mask",
    "read_png_rgb",
    "read_sample",
    "recon_loss",
    "sample_correspondences",
    "sampson_epipolar_loss",
    "sigmo_total_loss",
    "stitch_pipeline",
    "warp_loss",
    "write_flo",
    "write_pfm",
    "write_png_mask",
    "write_png_rgb",
    "write_sample",
]
