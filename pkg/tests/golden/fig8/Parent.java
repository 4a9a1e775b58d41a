public class Parent extends GrandParent implements ISecondary {
}
