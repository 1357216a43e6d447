"""Resolve torchvision architectures into flat conv/relu/pool chains.

Only plain sequential prefixes are exportable.  Every module in the
walk gets classified; anything outside the three supported ops is kept
in the list with a reason string so tap resolution can fail loudly when
the requested prefix would need it.
"""

from dataclasses import dataclass

import torch
from torch import nn

from .errors import MissingNetwork, UnsupportedLayer

# torchvision's standard input normalization, recorded in the bundle
IMAGE_MEANS = (0.485, 0.456, 0.406)
IMAGE_SCALES = (0.229, 0.224, 0.225)

KNOWN_NETWORKS = ("vgg16", "alexnet", "squeezenet1_0", "resnet18")


@dataclass
class ChainEntry:
    name: str
    kind: str  # "conv" | "relu" | "pool" | "unsupported"
    module: object
    reason: str = ""


def _classify(module):
    """(kind, reason) for one leaf module."""
    if isinstance(module, nn.Conv2d):
        kh, kw = module.kernel_size
        sh, sw = module.stride
        pad = module.padding
        if isinstance(pad, str):
            return "unsupported", f"string padding {pad!r}"
        ph, pw = pad
        if module.groups != 1:
            return "unsupported", f"grouped conv (groups={module.groups})"
        if module.dilation != (1, 1):
            return "unsupported", f"dilated conv {module.dilation}"
        if sh != sw or ph != pw:
            return "unsupported", f"anisotropic stride/padding {module.stride}/{pad}"
        # bias-free convs (resnet style) export with a zero bias vector
        if max(kh, kw, sh, ph) > 255 or module.out_channels > 0xFFFF:
            return "unsupported", "conv geometry exceeds format field widths"
        return "conv", ""
    if isinstance(module, nn.ReLU):
        return "relu", ""
    if isinstance(module, nn.MaxPool2d):
        ks = module.kernel_size if isinstance(module.kernel_size, tuple) else (module.kernel_size,) * 2
        st = module.stride if isinstance(module.stride, tuple) else (module.stride,) * 2
        pd = module.padding if isinstance(module.padding, tuple) else (module.padding,) * 2
        if ks == (2, 2) and st == (2, 2) and pd == (0, 0) and not module.ceil_mode:
            return "pool", ""
        return "unsupported", f"maxpool {ks} stride {st} (only 2x2/2 supported)"
    return "unsupported", type(module).__name__


def _instantiate(network, init):
    from torchvision import models

    if network not in KNOWN_NETWORKS:
        raise MissingNetwork(
            f"unknown network {network!r}; known: {', '.join(KNOWN_NETWORKS)}"
        )
    torch.manual_seed(0)  # fixed random init: same name -> same bundle
    if init == "random":
        return models.get_model(network, weights=None)
    try:
        return models.get_model(network, weights="DEFAULT")
    except Exception as exc:
        raise MissingNetwork(
            f"pretrained weights for {network!r} are not available locally "
            f"({exc}); use --init random for an untrained copy"
        ) from exc


def _leaf_modules(network, model):
    if network.startswith("resnet"):
        mods = [model.conv1, model.bn1, model.relu, model.maxpool]
        for block in (model.layer1, model.layer2, model.layer3, model.layer4):
            mods.extend(block.children())
        return mods
    return list(model.features.children())


def build_chain(network, init="pretrained"):
    """ChainEntry list for a network, names assigned in chain notation.

    vgg-style nets use block names (conv2_1, relu2_1, pool2); everything
    else numbers each kind globally (conv1, relu1, pool1, conv2, ...).
    """
    model = _instantiate(network, init)
    model.eval()
    vgg_style = network.startswith("vgg")
    entries = []
    block, conv_in_block = 1, 0
    counters = {"conv": 0, "relu": 0, "pool": 0}
    for i, module in enumerate(_leaf_modules(network, model)):
        kind, reason = _classify(module)
        if kind == "conv":
            conv_in_block += 1
            counters["conv"] += 1
            name = f"conv{block}_{conv_in_block}" if vgg_style else f"conv{counters['conv']}"
        elif kind == "relu":
            counters["relu"] += 1
            name = f"relu{block}_{conv_in_block}" if vgg_style else f"relu{counters['relu']}"
        elif kind == "pool":
            counters["pool"] += 1
            name = f"pool{block}" if vgg_style else f"pool{counters['pool']}"
            block += 1
            conv_in_block = 0
        else:
            name = f"<{reason}@{i}>"
        entries.append(ChainEntry(name, kind, module, reason))
    return entries


def cut_chain(entries, taps):
    """Validate taps and return the exportable prefix ending at the deepest.

    Raises UnsupportedLayer when a tap is unknown or the prefix passes
    through anything but conv/relu/2x2-maxpool.
    """
    if not taps:
        raise UnsupportedLayer("at least one tap layer is required")
    names = [e.name for e in entries if e.kind != "unsupported"]
    positions = []
    for tap in taps:
        matches = [i for i, e in enumerate(entries) if e.name == tap]
        if not matches:
            raise UnsupportedLayer(
                f"no exportable layer named {tap!r}; chain has: {', '.join(names)}"
            )
        positions.append(matches[0])
    cut = max(positions)
    prefix = entries[: cut + 1]
    for entry in prefix:
        if entry.kind == "unsupported":
            raise UnsupportedLayer(
                f"chain to {taps!r} needs an unsupported op: {entry.reason}"
            )
    return prefix
